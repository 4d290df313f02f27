// Copyright 2026 The dpip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Thin wrapper over libsodium: Ed25519 detached signatures, randomness and
// text encodings.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dpip/model.hpp"

namespace dpip::crypto {

inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSecretKeySize = 64;
inline constexpr std::size_t kSignatureSize = 64;

using PublicKey = std::array<std::uint8_t, kPublicKeySize>;
using SecretKey = std::array<std::uint8_t, kSecretKeySize>;
using Signature = std::array<std::uint8_t, kSignatureSize>;

struct KeyPair {
  PublicKey pk{};
  SecretKey sk{};
};

// Initializes libsodium once; every function below calls it.
void EnsureInitialized();

KeyPair GenerateKeyPair();
Signature Sign(const SecretKey& sk, std::span<const std::uint8_t> message);
bool Verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const Signature& sig);

void RandomBytes(std::span<std::uint8_t> out);
// 128-bit random value as 32 lowercase hex digits.
std::string RandomHex128();

std::string ToHex(std::span<const std::uint8_t> bytes);
std::string ToBase64(std::span<const std::uint8_t> bytes);
std::optional<Bytes> FromBase64(std::string_view text);

// Constant-time equality for secrets such as bearer tokens.
bool ConstantTimeEquals(std::string_view a, std::string_view b);

}  // namespace dpip::crypto
