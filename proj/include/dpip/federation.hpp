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

// Cross-domain access protocol.
//
// Verifier side (Gateway, the PEP facing other domains):
//   initiate  -> unprotected: Permit + content
//             -> protected:   a single-use challenge carrying the required
//                             predicate (names only) and the message to sign
//   complete  -> verifies the ABS signature against the claim rebuilt from
//                the verifier's own policy, consuming the challenge
//
// Requester side (Requester, the PEP of the user's home domain): runs
// initiate, localizes names, queries the local PIP, builds the claim, fetches
// or creates keys, signs, and completes.

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dpip/abs.hpp"
#include "dpip/key_cache.hpp"
#include "dpip/model.hpp"
#include "dpip/services.hpp"

namespace dpip {

using WallClock = std::function<UnixSeconds()>;
UnixSeconds SystemNow();

using Logger = std::function<void(std::string_view)>;

struct Challenge {
  std::string challenge_id;
  AccessMessage message;
  RequiredPredicate required;
  std::string resource_id;
  std::string peer_domain;
  UnixSeconds expires_at{};
};

class ChallengeTable {
 public:
  void Insert(Challenge challenge, UnixSeconds now);
  // Atomically removes and returns the challenge if it exists and
  // now < expires_at. Expired challenges are dropped too.
  std::optional<Challenge> Take(const std::string& challenge_id,
                                UnixSeconds now);
  std::size_t size() const;

 private:
  using ExpiryIndex = std::multimap<UnixSeconds, std::string>;
  struct Entry {
    Challenge challenge;
    ExpiryIndex::iterator expiry;
  };

  mutable std::mutex mu_;
  std::map<std::string, Entry> live_;
  ExpiryIndex by_expiry_;
};

// ---- wire-level results shared by transports --------------------------------

struct ChallengeOffer {
  std::string challenge_id;
  RequiredPredicate required;
  AccessMessage message;
};

struct InitiateResponse {
  // Set for an immediate answer: Permit (unprotected resource) or Deny
  // (unknown-resource / unknown-peer).
  std::optional<Decision> decision;
  Bytes content;
  std::optional<ChallengeOffer> challenge;
};

struct CompleteResponse {
  Decision decision;
  Bytes content;
  // Server-side verification time, when the verifier reported it.
  std::optional<double> verify_s;
};

// How a requester reaches one peer. Transport failures throw
// Error(kTransport).
class PeerTransport {
 public:
  virtual ~PeerTransport() = default;
  virtual std::vector<ResourceName> ListResources() = 0;
  virtual InitiateResponse Initiate(const std::string& resource_id,
                                    const std::string& requester_domain) = 0;
  virtual CompleteResponse Complete(const std::string& challenge_id,
                                    std::span<const std::uint8_t> sig) = 0;
  virtual abs::TrusteePublicKey FetchTpk() = 0;
  virtual abs::AuthorityPublicKey FetchApk() = 0;
};

struct PeerEntry {
  std::string domain_id;
  std::string base_url;
  AliasMap aliases;
  std::optional<abs::AuthorityPublicKey> apk;
};

using TransportFactory =
    std::function<std::unique_ptr<PeerTransport>(const PeerEntry&)>;

class PeerRegistry {
 public:
  PeerRegistry(abs::TrusteePublicKey local_tpk, TransportFactory factory);

  // Adds or replaces a peer without contacting it.
  void Configure(PeerEntry entry);
  // Fetches the peer's TPK and APK and pins them. Throws kTpkMismatch when
  // the peer belongs to another federation (the peer is then not added or
  // changed), kTransport on network failure. Idempotent.
  PeerEntry Register(const std::string& domain_id, const std::string& base_url);

  std::optional<PeerEntry> Get(const std::string& domain_id) const;
  bool Contains(const std::string& domain_id) const;
  // The pinned APK, registering a configured peer on first use. Throws
  // kUnknownPeer for peers that were never configured.
  abs::AuthorityPublicKey RequireApk(const std::string& domain_id);
  // Throws kUnknownPeer.
  std::unique_ptr<PeerTransport> Connect(const std::string& domain_id) const;

 private:
  abs::TrusteePublicKey tpk_;
  TransportFactory factory_;
  mutable std::mutex mu_;
  std::map<std::string, PeerEntry> peers_;
};

struct GatewayOptions {
  std::string domain_id;
  abs::TrusteePublicKey tpk;
  std::chrono::seconds challenge_ttl{60};
  WallClock clock = SystemNow;
  Logger log;
};

struct CompleteResult {
  Decision decision;  // what the peer sees
  Bytes content;
  double verify_s = 0;
  // Local diagnostic; never sent to the peer.
  std::string detail;
};

class Gateway {
 public:
  Gateway(GatewayOptions options, const Pap& pap, PeerRegistry& peers);

  std::vector<ResourceName> ListResources() const;

  // Throws kUnknownResource or kUnknownPeer; nothing is stored then.
  InitiateResponse Initiate(const std::string& resource_id,
                            const std::string& requester_domain);

  // Never throws. Consumes the challenge whatever the outcome.
  CompleteResult Complete(const std::string& challenge_id,
                          std::span<const std::uint8_t> encoded_sig);

  const ChallengeTable& challenges() const { return challenges_; }
  const std::string& domain_id() const { return options_.domain_id; }

 private:
  void Log(const std::string& line) const;

  GatewayOptions options_;
  const Pap& pap_;
  PeerRegistry& peers_;
  ChallengeTable challenges_;
};

// Calls a Gateway in-process, round-tripping the signature through its
// binary encoding. Used by tests and by exhaustive equivalence checks.
class InProcessTransport : public PeerTransport {
 public:
  InProcessTransport(Gateway& gateway, abs::TrusteePublicKey tpk,
                     abs::AuthorityPublicKey apk);

  std::vector<ResourceName> ListResources() override;
  InitiateResponse Initiate(const std::string& resource_id,
                            const std::string& requester_domain) override;
  CompleteResponse Complete(const std::string& challenge_id,
                            std::span<const std::uint8_t> sig) override;
  abs::TrusteePublicKey FetchTpk() override { return tpk_; }
  abs::AuthorityPublicKey FetchApk() override { return apk_; }

 private:
  Gateway& gateway_;
  abs::TrusteePublicKey tpk_;
  abs::AuthorityPublicKey apk_;
};

struct PhaseTimings {
  std::optional<double> initiate_s;
  std::optional<double> pip_s;
  std::optional<double> asetup_s;
  std::optional<double> attrgen_s;
  std::optional<double> sign_s;
  // Round trip of the complete call, and the verifier's share of it.
  std::optional<double> complete_s;
  std::optional<double> verify_s;
  // Network share: initiate plus complete minus verify.
  std::optional<double> transfer_s;
  double total_s = 0;
};

struct AccessOutcome {
  Decision decision;
  Bytes content;
  PhaseTimings timings;
  // Peer calls made, in order: "initiate", "complete".
  std::vector<std::string> peer_calls;
};

class Requester {
 public:
  Requester(std::string domain_id, abs::TrusteePublicKey tpk,
            const AttributeSource& pip, PeerRegistry& peers,
            KeyCache& fresh_keys, KeyCache& cached_keys);

  // Throws MissingAttributeError when the local PIP cannot fill the
  // required predicate (no signature is attempted and nothing more is sent
  // to the peer), kUnknownUser, kAliasCollision, kUnknownPeer, kTransport.
  AccessOutcome RequestRemoteResource(const std::string& peer_id,
                                      const std::string& resource_id,
                                      const std::string& user_id,
                                      CacheMode mode);

  std::vector<ResourceName> ListRemote(const std::string& peer_id);

 private:
  std::string domain_id_;
  abs::TrusteePublicKey tpk_;
  const AttributeSource& pip_;
  PeerRegistry& peers_;
  KeyCache& fresh_keys_;
  KeyCache& cached_keys_;
};

}  // namespace dpip
