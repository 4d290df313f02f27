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

#include "dpip/abs.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wire.hpp"

namespace dpip::abs {

namespace {

constexpr std::string_view kTpkMagic = "DTPK";
constexpr std::string_view kApkMagic = "DAPK";
constexpr std::string_view kAskMagic = "DASK";
constexpr std::string_view kSkaMagic = "DSKA";
constexpr std::string_view kEndorsementMagic = "DEND";
constexpr std::string_view kSignatureMagic = "DSIG";

void Append(Bytes& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

template <typename Range>
void Append(Bytes& out, const Range& bytes) {
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

Bytes TokenInput(const TrusteePublicKey& tpk, const Attribute& leaf,
                 const crypto::PublicKey& upk) {
  Bytes in;
  Append(in, std::string_view("ATTR"));
  Append(in, tpk.salt);
  Append(in, CanonicalLeafBytes(leaf));
  Append(in, upk);
  return in;
}

Bytes BindingInput(const TrusteePublicKey& tpk, const ClaimPredicate& claim,
                   const AccessMessage& message) {
  Bytes in;
  Append(in, std::string_view("BIND"));
  Append(in, tpk.salt);
  Append(in, CanonicalBytes(claim));
  Append(in, CanonicalBytes(message));
  return in;
}

Bytes EndorsementInput(const TrusteePublicKey& tpk,
                       const AuthorityPublicKey& root,
                       const crypto::PublicKey& issuer_key) {
  Bytes in;
  Append(in, std::string_view("APKE"));
  Append(in, tpk.salt);
  Append(in, root.domain_id);
  in.push_back(kRecordSeparator);
  Append(in, issuer_key);
  return in;
}

void WriteLeaf(wire::Writer& w, const Attribute& leaf) {
  w.Field(CategoryName(leaf.category));
  w.Field(leaf.name);
  w.Field(leaf.value);
}

Attribute ReadLeaf(wire::Reader& r) {
  auto category = ParseCategory(r.Text());
  if (!category) wire::Reader::Fail("unknown category");
  std::string name = r.Text();
  std::string value = r.Text();
  try {
    return Attribute::Make(*category, std::move(name), std::move(value));
  } catch (const Error& e) {
    wire::Reader::Fail(e.what());
  }
}

}  // namespace

std::vector<Attribute> SigningKey::attrs() const {
  std::vector<Attribute> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.leaf);
  return out;
}

TrusteePublicKey TsSetup(std::string federation_id) {
  ValidateIdentifier("federation_id", federation_id);
  TrusteePublicKey tpk;
  tpk.federation_id = std::move(federation_id);
  crypto::RandomBytes(tpk.salt);
  tpk.hash_id = std::string(kHashId);
  return tpk;
}

AuthorityKeys ASetup(const TrusteePublicKey& tpk, std::string domain_id) {
  if (tpk.hash_id != kHashId) {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported hash id '" + tpk.hash_id + "'");
  }
  ValidateIdentifier("domain_id", domain_id);
  crypto::KeyPair kp = crypto::GenerateKeyPair();
  return {{std::move(domain_id), kp.pk}, kp.sk};
}

IssuerEndorsement Endorse(const AuthorityKeys& root,
                          const TrusteePublicKey& tpk,
                          const AuthorityPublicKey& issuer) {
  return {issuer.key,
          crypto::Sign(root.ask, EndorsementInput(tpk, root.apk, issuer.key))};
}

SigningKey AttrGen(const AuthorityKeys& authority, const TrusteePublicKey& tpk,
                   std::span<const Attribute> attrs) {
  if (attrs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "a signing key needs at least one attribute");
  }
  std::vector<Attribute> sorted(attrs.begin(), attrs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Attribute& a, const Attribute& b) {
              return a.key() < b.key();
            });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ValidateAttributeName(sorted[i].name);
    ValidateAttributeValue(sorted[i].value);
    if (i > 0 && sorted[i - 1].key() == sorted[i].key()) {
      throw Error(ErrorCode::kDuplicateAttribute,
                  "attribute " + ToString(sorted[i].key()) + " given twice");
    }
  }

  crypto::KeyPair user = crypto::GenerateKeyPair();
  SigningKey ska;
  ska.upk = user.pk;
  ska.usk = user.sk;
  ska.tokens.reserve(sorted.size());
  for (auto& leaf : sorted) {
    crypto::Signature token =
        crypto::Sign(authority.ask, TokenInput(tpk, leaf, ska.upk));
    ska.tokens.push_back({std::move(leaf), token});
  }
  return ska;
}

AbsSignature Sign(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
                  const SigningKey& ska, const AccessMessage& message,
                  const ClaimPredicate& claim,
                  const std::optional<IssuerEndorsement>& endorsement) {
  AbsSignature sig;
  sig.upk = ska.upk;
  sig.leaf_tokens.reserve(claim.size());

  std::string problems;
  for (const auto& leaf : claim.leaves()) {
    auto it = std::find_if(
        ska.tokens.begin(), ska.tokens.end(),
        [&](const AttributeToken& t) { return t.leaf.key() == leaf.key(); });
    if (it == ska.tokens.end()) {
      problems += " missing " + ToString(leaf.key()) + ";";
    } else if (it->leaf.value != leaf.value) {
      problems += " mismatched " + ToString(leaf.key()) + ";";
    } else {
      sig.leaf_tokens.push_back(it->token);
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kPredicateUnsatisfied,
                "signing key does not satisfy the claim predicate:" + problems);
  }
  if (endorsement) {
    if (endorsement->issuer_key != apk.key) {
      throw Error(ErrorCode::kInvalidArgument,
                  "endorsement does not name the signing authority");
    }
    sig.issuer = endorsement;
  }
  sig.binding = crypto::Sign(ska.usk, BindingInput(tpk, claim, message));
  return sig;
}

bool Verify(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
            const AccessMessage& message, const ClaimPredicate& claim,
            const AbsSignature& sig) {
  if (tpk.hash_id != kHashId) return false;
  if (sig.leaf_tokens.size() != claim.size()) return false;

  crypto::PublicKey token_key = apk.key;
  if (sig.issuer) {
    if (!crypto::Verify(apk.key,
                        EndorsementInput(tpk, apk, sig.issuer->issuer_key),
                        sig.issuer->endorsement)) {
      return false;
    }
    token_key = sig.issuer->issuer_key;
  }

  for (std::size_t i = 0; i < claim.size(); ++i) {
    if (!crypto::Verify(token_key, TokenInput(tpk, claim.leaves()[i], sig.upk),
                        sig.leaf_tokens[i])) {
      return false;
    }
  }
  return crypto::Verify(sig.upk, BindingInput(tpk, claim, message),
                        sig.binding);
}

bool Verify(const TrusteePublicKey& tpk, const AuthorityPublicKey& apk,
            const AccessMessage& message, const ClaimPredicate& claim,
            std::span<const std::uint8_t> encoded_sig) {
  AbsSignature sig;
  try {
    sig = DecodeSignature(encoded_sig);
  } catch (const Error&) {
    return false;
  }
  return Verify(tpk, apk, message, claim, sig);
}

Bytes Encode(const TrusteePublicKey& tpk) {
  wire::Writer w(kTpkMagic);
  w.Field(tpk.federation_id);
  w.Field(tpk.salt);
  w.Field(tpk.hash_id);
  return std::move(w).Finish();
}

Bytes Encode(const AuthorityPublicKey& apk) {
  wire::Writer w(kApkMagic);
  w.Field(apk.domain_id);
  w.Field(apk.key);
  return std::move(w).Finish();
}

Bytes Encode(const AuthorityKeys& keys) {
  wire::Writer w(kAskMagic);
  w.Field(keys.apk.domain_id);
  w.Field(keys.apk.key);
  w.Field(keys.ask);
  return std::move(w).Finish();
}

Bytes Encode(const SigningKey& ska) {
  wire::Writer w(kSkaMagic);
  w.Field(ska.upk);
  w.Field(ska.usk);
  w.U32(static_cast<std::uint32_t>(ska.tokens.size()));
  for (const auto& t : ska.tokens) {
    WriteLeaf(w, t.leaf);
    w.Field(t.token);
  }
  return std::move(w).Finish();
}

Bytes Encode(const IssuerEndorsement& endorsement) {
  wire::Writer w(kEndorsementMagic);
  w.Field(endorsement.issuer_key);
  w.Field(endorsement.endorsement);
  return std::move(w).Finish();
}

Bytes Encode(const AbsSignature& sig) {
  wire::Writer w(kSignatureMagic);
  w.Field(sig.upk);
  if (sig.issuer) {
    w.Field(sig.issuer->issuer_key);
    w.Field(sig.issuer->endorsement);
  } else {
    w.Field(std::span<const std::uint8_t>());
    w.Field(std::span<const std::uint8_t>());
  }
  w.U32(static_cast<std::uint32_t>(sig.leaf_tokens.size()));
  for (const auto& t : sig.leaf_tokens) w.Field(t);
  w.Field(sig.binding);
  return std::move(w).Finish();
}

TrusteePublicKey DecodeTpk(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kTpkMagic);
  TrusteePublicKey tpk;
  tpk.federation_id = r.Text();
  tpk.salt = r.Fixed<kSaltSize>();
  tpk.hash_id = r.Text();
  r.Finish();
  if (tpk.federation_id.empty()) wire::Reader::Fail("empty federation id");
  return tpk;
}

AuthorityPublicKey DecodeApk(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kApkMagic);
  AuthorityPublicKey apk;
  apk.domain_id = r.Text();
  apk.key = r.Fixed<crypto::kPublicKeySize>();
  r.Finish();
  if (apk.domain_id.empty()) wire::Reader::Fail("empty domain id");
  return apk;
}

AuthorityKeys DecodeAuthorityKeys(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kAskMagic);
  AuthorityKeys keys;
  keys.apk.domain_id = r.Text();
  keys.apk.key = r.Fixed<crypto::kPublicKeySize>();
  keys.ask = r.Fixed<crypto::kSecretKeySize>();
  r.Finish();
  return keys;
}

SigningKey DecodeSigningKey(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kSkaMagic);
  SigningKey ska;
  ska.upk = r.Fixed<crypto::kPublicKeySize>();
  ska.usk = r.Fixed<crypto::kSecretKeySize>();
  std::uint32_t count = r.U32();
  if (count > r.remaining()) wire::Reader::Fail("token count too large");
  for (std::uint32_t i = 0; i < count; ++i) {
    Attribute leaf = ReadLeaf(r);
    ska.tokens.push_back({std::move(leaf), r.Fixed<crypto::kSignatureSize>()});
  }
  r.Finish();
  return ska;
}

IssuerEndorsement DecodeEndorsement(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kEndorsementMagic);
  IssuerEndorsement e;
  e.issuer_key = r.Fixed<crypto::kPublicKeySize>();
  e.endorsement = r.Fixed<crypto::kSignatureSize>();
  r.Finish();
  return e;
}

AbsSignature DecodeSignature(std::span<const std::uint8_t> in) {
  wire::Reader r(in, kSignatureMagic);
  AbsSignature sig;
  sig.upk = r.Fixed<crypto::kPublicKeySize>();
  auto issuer_key = r.Field();
  auto endorsement = r.Field();
  if (issuer_key.empty() != endorsement.empty()) {
    wire::Reader::Fail("partial issuer endorsement");
  }
  if (!issuer_key.empty()) {
    if (issuer_key.size() != crypto::kPublicKeySize ||
        endorsement.size() != crypto::kSignatureSize) {
      wire::Reader::Fail("issuer endorsement has wrong length");
    }
    IssuerEndorsement e;
    std::copy(issuer_key.begin(), issuer_key.end(), e.issuer_key.begin());
    std::copy(endorsement.begin(), endorsement.end(), e.endorsement.begin());
    sig.issuer = e;
  }
  std::uint32_t count = r.U32();
  if (count > r.remaining() / (4 + crypto::kSignatureSize)) {
    wire::Reader::Fail("token count too large");
  }
  sig.leaf_tokens.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    sig.leaf_tokens.push_back(r.Fixed<crypto::kSignatureSize>());
  }
  sig.binding = r.Fixed<crypto::kSignatureSize>();
  r.Finish();
  return sig;
}

void WriteTpkFile(const std::string& path, const TrusteePublicKey& tpk) {
  std::ofstream out(path, std::ios::trunc);
  out << crypto::ToBase64(Encode(tpk)) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write TPK file " + path);
}

TrusteePublicKey ReadTpkFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read TPK file " + path);
  std::string line;
  std::getline(in, line);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.pop_back();
  }
  auto raw = crypto::FromBase64(line);
  if (!raw) throw Error(ErrorCode::kMalformed, "TPK file is not base64");
  return DecodeTpk(*raw);
}

}  // namespace dpip::abs
