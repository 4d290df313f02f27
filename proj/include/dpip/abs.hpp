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

// Attribute-based signatures for conjunction predicates.
//
// The five operations (TsSetup, ASetup, AttrGen, Sign, Verify) follow the
// usual ABS contract. The construction is built from Ed25519 alone:
//
//   token(L)  = Sign_ask ("ATTR" | salt | canonical(L) | upk)
//   binding   = Sign_usk ("BIND" | salt | canonical(claim) | canonical(msg))
//
// where upk/usk is a keypair minted per signing key. A signature carries upk,
// one token per claim leaf (in leaf order) and the binding. The verifier
// rebuilds the claim from its own policy, so it learns nothing about the
// signer beyond the fact that the claim holds.
//
// Caveat: upk is a per-signing-key pseudonym. Two signatures made with the
// same signing key are linkable to each other, which is weaker than the
// unlinkability of pairing-based ABS.
//
// Issuer delegation: a domain's long-lived authority key (the APK peers pin)
// may endorse a short-lived issuer key:
//
//   endorsement = Sign_root ("APKE" | salt | domain_id | RS | issuer_pk)
//
// A signature that carries an endorsement has its tokens checked under the
// endorsed issuer key instead of the pinned APK.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpip/crypto.hpp"
#include "dpip/model.hpp"

namespace dpip::abs {

inline constexpr std::size_t kSaltSize = 32;
// Ed25519 hashes its input internally with SHA-512.
inline constexpr std::string_view kHashId = "ed25519-sha512";

struct TrusteePublicKey {
  std::string federation_id;
  std::array<std::uint8_t, kSaltSize> salt{};
  std::string hash_id;

  bool operator==(const TrusteePublicKey&) const = default;
};

struct AuthorityPublicKey {
  std::string domain_id;
  crypto::PublicKey key{};

  bool operator==(const AuthorityPublicKey&) const = default;
};

// APK plus the ASK that never leaves the issuing domain.
struct AuthorityKeys {
  AuthorityPublicKey apk;
  crypto::SecretKey ask{};
};

struct AttributeToken {
  Attribute leaf;
  crypto::Signature token{};
};

// SKA: a fresh user keypair and one authority token per covered attribute,
// sorted by (category, name).
struct SigningKey {
  crypto::PublicKey upk{};
  crypto::SecretKey usk{};
  std::vector<AttributeToken> tokens;

  std::vector<Attribute> attrs() const;
};

struct IssuerEndorsement {
  crypto::PublicKey issuer_key{};
  crypto::Signature endorsement{};

  bool operator==(const IssuerEndorsement&) const = default;
};

struct AbsSignature {
  crypto::PublicKey upk{};
  std::optional<IssuerEndorsement> issuer;
  std::vector<crypto::Signature> leaf_tokens;
  crypto::Signature binding{};

  bool operator==(const AbsSignature&) const = default;
};

TrusteePublicKey TsSetup(std::string federation_id);

AuthorityKeys ASetup(const TrusteePublicKey& tpk, std::string domain_id);

// Endorses `issuer` so that its tokens verify under `root`'s APK.
IssuerEndorsement Endorse(const AuthorityKeys& root, const TrusteePublicKey& tpk,
                          const AuthorityPublicKey& issuer);

// Throws kInvalidArgument when attrs is empty and kDuplicateAttribute on a
// repeated (category, name).
SigningKey AttrGen(const AuthorityKeys& authority, const TrusteePublicKey& tpk,
                   std::span<const Attribute> attrs);

// Throws kPredicateUnsatisfied, naming the offending leaves, when the signing
// key does not hold every claim leaf with an equal value. `endorsement`, if
// given, must be the endorsement of `apk` and is embedded in the signature.
AbsSignature Sign(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
                  const SigningKey& ska, const AccessMessage& message,
                  const ClaimPredicate& claim,
                  const std::optional<IssuerEndorsement>& endorsement = {});

// Total: any malformed or mismatching input yields false.
bool Verify(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
            const AccessMessage& message, const ClaimPredicate& claim,
            const AbsSignature& sig);
bool Verify(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
            const AccessMessage& message, const ClaimPredicate& claim,
            std::span<const std::uint8_t> encoded_sig);

// Binary encodings (docs/formats.md). Decoders throw Error(kMalformed).
Bytes Encode(const TrusteePublicKey& tpk);
Bytes Encode(const AuthorityPublicKey& apk);
Bytes Encode(const AuthorityKeys& keys);
Bytes Encode(const SigningKey& ska);
Bytes Encode(const IssuerEndorsement& endorsement);
Bytes Encode(const AbsSignature& sig);

TrusteePublicKey DecodeTpk(std::span<const std::uint8_t> in);
AuthorityPublicKey DecodeApk(std::span<const std::uint8_t> in);
AuthorityKeys DecodeAuthorityKeys(std::span<const std::uint8_t> in);
SigningKey DecodeSigningKey(std::span<const std::uint8_t> in);
IssuerEndorsement DecodeEndorsement(std::span<const std::uint8_t> in);
AbsSignature DecodeSignature(std::span<const std::uint8_t> in);

// Text file holding the base64 TPK encoding on one line.
void WriteTpkFile(const std::string& path, const TrusteePublicKey& tpk);
TrusteePublicKey ReadTpkFile(const std::string& path);

}  // namespace dpip::abs
