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

#include "dpip/key_cache.hpp"

#include <chrono>

#include "json_file.hpp"

namespace dpip {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string CacheKey(const ClaimPredicate& claim) {
  return crypto::ToHex(CanonicalBytes(claim));
}

Bytes FromB64(const Json& j, const char* key) {
  auto raw = crypto::FromBase64(JsonString(j, key));
  if (!raw) throw Error(ErrorCode::kMalformed, "bad base64 in key cache");
  return *raw;
}

Json BundleToJson(const KeyBundle& b, const ClaimPredicate& claim) {
  Json j = {
      {"claim", ToJson(std::span<const Attribute>(claim.leaves()))},
      {"authority_b64", crypto::ToBase64(abs::Encode(b.authority))},
      {"ska_b64", crypto::ToBase64(abs::Encode(b.ska))},
  };
  j["endorsement_b64"] =
      b.endorsement ? Json(crypto::ToBase64(abs::Encode(*b.endorsement)))
                    : Json(nullptr);
  return j;
}

std::shared_ptr<const KeyBundle> BundleFromJson(const Json& j) {
  auto b = std::make_shared<KeyBundle>();
  b->authority = abs::DecodeAuthorityKeys(FromB64(j, "authority_b64"));
  b->ska = abs::DecodeSigningKey(FromB64(j, "ska_b64"));
  if (j.contains("endorsement_b64") && !j["endorsement_b64"].is_null()) {
    b->endorsement = abs::DecodeEndorsement(FromB64(j, "endorsement_b64"));
  }
  return b;
}

bool Covers(std::span<const Attribute> attrs, const ClaimPredicate& claim) {
  for (const auto& leaf : claim.leaves()) {
    bool found = false;
    for (const auto& a : attrs) {
      if (a == leaf) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

Json EmptyStore() { return {{"version", 1}, {"entries", Json::object()}}; }

}  // namespace

std::string_view CacheModeName(CacheMode mode) {
  return mode == CacheMode::kFresh ? "fresh" : "cached";
}

std::optional<CacheMode> ParseCacheMode(std::string_view text) {
  if (text == "fresh") return CacheMode::kFresh;
  if (text == "cached") return CacheMode::kCached;
  return std::nullopt;
}

KeyCache::KeyCache(CacheMode mode, abs::TrusteePublicKey tpk,
                   std::string domain_id,
                   std::optional<abs::AuthorityKeys> root,
                   std::filesystem::path store_path)
    : mode_(mode),
      tpk_(std::move(tpk)),
      domain_id_(std::move(domain_id)),
      root_(std::move(root)),
      store_path_(mode == CacheMode::kCached ? std::move(store_path)
                                             : std::filesystem::path()) {
  if (!store_path_.empty()) LoadStore();
}

void KeyCache::LoadStore() {
  Json doc = ReadJsonFile(store_path_, EmptyStore());
  if (!doc.contains("entries") || !doc["entries"].is_object()) {
    throw Error(ErrorCode::kMalformed,
                store_path_.string() + " has no entries object");
  }
  std::lock_guard lock(mu_);
  for (const auto& [key, value] : doc["entries"].items()) {
    auto slot = std::make_shared<Slot>();
    slot->bundle = BundleFromJson(value);
    slots_[key] = std::move(slot);
  }
}

std::shared_ptr<const KeyBundle> KeyCache::Create(const ClaimPredicate& claim,
                                                  KeyTimings& timings) const {
  auto bundle = std::make_shared<KeyBundle>();
  auto start = Clock::now();
  bundle->authority = abs::ASetup(tpk_, domain_id_);
  if (root_) {
    bundle->endorsement = abs::Endorse(*root_, tpk_, bundle->authority.apk);
  }
  timings.asetup_s = SecondsSince(start);

  start = Clock::now();
  bundle->ska = abs::AttrGen(bundle->authority, tpk_, claim.leaves());
  timings.attrgen_s = SecondsSince(start);
  return bundle;
}

KeyLookup KeyCache::GetOrCreate(std::span<const Attribute> attrs,
                                const ClaimPredicate& claim) {
  if (!Covers(attrs, claim)) {
    throw Error(ErrorCode::kPredicateUnsatisfied,
                "attributes do not cover the claim predicate");
  }
  if (claim.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no keys are needed for an empty claim predicate");
  }

  KeyLookup out;
  if (mode_ == CacheMode::kFresh) {
    out.bundle = Create(claim, out.timings);
    return out;
  }

  std::string key = CacheKey(claim);
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mu_);
    auto& entry = slots_[key];
    if (!entry) entry = std::make_shared<Slot>();
    slot = entry;
  }

  std::lock_guard slot_lock(slot->mu);
  if (slot->bundle) {
    out.bundle = slot->bundle;
    out.timings.cache_hit = true;
    return out;
  }
  auto created = Create(claim, out.timings);
  if (!store_path_.empty()) {
    auto stored = Persist(key, created);
    if (stored != created) {
      // Another process won the race; its keys are authoritative.
      out.timings = KeyTimings{true, std::nullopt, std::nullopt};
      created = std::move(stored);
    }
  }
  slot->bundle = created;
  out.bundle = std::move(created);
  return out;
}

std::shared_ptr<const KeyBundle> KeyCache::Persist(
    const std::string& key, std::shared_ptr<const KeyBundle> bundle) {
  std::lock_guard lock(file_mu_);
  ScopedFileLock file_lock(store_path_);
  Json doc = ReadJsonFile(store_path_, EmptyStore());
  auto& entries = doc["entries"];
  if (entries.contains(key)) return BundleFromJson(entries[key]);

  ClaimPredicate claim = ClaimPredicate::FromLeaves(bundle->ska.attrs());
  entries[key] = BundleToJson(*bundle, claim);
  WriteJsonFileAtomic(store_path_, doc);
  return bundle;
}

std::pair<abs::AbsSignature, bool> KeyCache::SignCached(
    const KeyBundle& bundle, const ClaimPredicate& claim,
    const AccessMessage& message) {
  Bytes key_bytes = CanonicalBytes(claim);
  Bytes msg = CanonicalBytes(message);
  key_bytes.insert(key_bytes.end(), msg.begin(), msg.end());
  std::string key = crypto::ToHex(key_bytes);

  std::lock_guard lock(sig_mu_);
  if (auto it = signatures_.find(key); it != signatures_.end()) {
    return {it->second, true};
  }
  auto sig = abs::Sign(tpk_, bundle.authority.apk, bundle.ska, message, claim,
                       bundle.endorsement);
  signatures_.emplace(key, sig);
  return {sig, false};
}

std::size_t KeyCache::size() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [key, slot] : slots_) {
    std::lock_guard slot_lock(slot->mu);
    if (slot->bundle) ++n;
  }
  return n;
}

}  // namespace dpip
