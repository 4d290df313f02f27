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

#include "dpip/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace dpip::crypto {

static_assert(kPublicKeySize == crypto_sign_PUBLICKEYBYTES);
static_assert(kSecretKeySize == crypto_sign_SECRETKEYBYTES);
static_assert(kSignatureSize == crypto_sign_BYTES);

void EnsureInitialized() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

KeyPair GenerateKeyPair() {
  EnsureInitialized();
  KeyPair kp;
  crypto_sign_keypair(kp.pk.data(), kp.sk.data());
  return kp;
}

Signature Sign(const SecretKey& sk, std::span<const std::uint8_t> message) {
  EnsureInitialized();
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       sk.data());
  return sig;
}

bool Verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const Signature& sig) {
  EnsureInitialized();
  return crypto_sign_verify_detached(sig.data(), message.data(),
                                     message.size(), pk.data()) == 0;
}

void RandomBytes(std::span<std::uint8_t> out) {
  EnsureInitialized();
  randombytes_buf(out.data(), out.size());
}

std::string RandomHex128() {
  std::array<std::uint8_t, 16> raw{};
  RandomBytes(raw);
  return ToHex(raw);
}

std::string ToHex(std::span<const std::uint8_t> bytes) {
  EnsureInitialized();
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

std::string ToBase64(std::span<const std::uint8_t> bytes) {
  EnsureInitialized();
  constexpr int kVariant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), kVariant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(),
                    kVariant);
  out.resize(out.size() - 1);
  return out;
}

std::optional<Bytes> FromBase64(std::string_view text) {
  EnsureInitialized();
  Bytes out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(),
                        nullptr, &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size()) {
    return std::nullopt;
  }
  out.resize(len);
  return out;
}

bool ConstantTimeEquals(std::string_view a, std::string_view b) {
  EnsureInitialized();
  if (a.size() != b.size()) return false;
  return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace dpip::crypto
