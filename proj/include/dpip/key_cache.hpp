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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "dpip/abs.hpp"

namespace dpip {

// Fresh: new authority and signing keys for every request.
// Cached: one key bundle per canonical claim predicate, kept on disk.
enum class CacheMode { kFresh, kCached };

std::string_view CacheModeName(CacheMode mode);
std::optional<CacheMode> ParseCacheMode(std::string_view text);

struct KeyBundle {
  abs::AuthorityKeys authority;  // per-bundle issuer (apk, ask)
  std::optional<abs::IssuerEndorsement> endorsement;
  abs::SigningKey ska;
};

struct KeyTimings {
  bool cache_hit = false;
  // Absent when no key generation ran.
  std::optional<double> asetup_s;
  std::optional<double> attrgen_s;
};

struct KeyLookup {
  std::shared_ptr<const KeyBundle> bundle;
  KeyTimings timings;
};

// Thread-safe. In Cached mode a bundle is created at most once per canonical
// predicate, also across processes sharing `store_path`. Fresh mode never
// reads or writes the store.
class KeyCache {
 public:
  // `root`, when set, endorses each bundle's issuer key so signatures verify
  // under root's APK. `store_path` is ignored in Fresh mode; in Cached mode
  // an empty path keeps the cache in memory only.
  KeyCache(CacheMode mode, abs::TrusteePublicKey tpk, std::string domain_id,
           std::optional<abs::AuthorityKeys> root,
           std::filesystem::path store_path = {});

  CacheMode mode() const { return mode_; }

  // Throws kPredicateUnsatisfied unless `attrs` cover every claim leaf with
  // equal values; kIo on persistence failure. The signing key covers only
  // the claim leaves, never the rest of `attrs`.
  KeyLookup GetOrCreate(std::span<const Attribute> attrs,
                        const ClaimPredicate& claim);

  // Replay-compatible variant for benchmarking: reuses a signature made for
  // the same (claim, message) pair. Only meaningful in Cached mode.
  std::pair<abs::AbsSignature, bool> SignCached(const KeyBundle& bundle,
                                                const ClaimPredicate& claim,
                                                const AccessMessage& message);

  std::size_t size() const;

 private:
  struct Slot {
    std::mutex mu;
    std::shared_ptr<const KeyBundle> bundle;
  };

  std::shared_ptr<const KeyBundle> Create(const ClaimPredicate& claim,
                                          KeyTimings& timings) const;
  void LoadStore();
  // Inserts `bundle` under `key` unless another process already stored one,
  // in which case that one is returned.
  std::shared_ptr<const KeyBundle> Persist(
      const std::string& key, std::shared_ptr<const KeyBundle> bundle);

  CacheMode mode_;
  abs::TrusteePublicKey tpk_;
  std::string domain_id_;
  std::optional<abs::AuthorityKeys> root_;
  std::filesystem::path store_path_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::mutex file_mu_;

  std::mutex sig_mu_;
  std::map<std::string, abs::AbsSignature> signatures_;
};

}  // namespace dpip
