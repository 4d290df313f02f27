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

#include "dpip/federation.hpp"

#include <algorithm>

namespace dpip {

namespace {

using Steady = std::chrono::steady_clock;

double SecondsSince(Steady::time_point start) {
  return std::chrono::duration<double>(Steady::now() - start).count();
}

}  // namespace

UnixSeconds SystemNow() {
  return std::chrono::time_point_cast<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

// ---- ChallengeTable -------------------------------------------------------

void ChallengeTable::Insert(Challenge challenge, UnixSeconds now) {
  std::lock_guard lock(mu_);
  auto end = by_expiry_.upper_bound(now);
  for (auto it = by_expiry_.begin(); it != end;) {
    live_.erase(it->second);
    it = by_expiry_.erase(it);
  }
  if (auto old = live_.find(challenge.challenge_id); old != live_.end()) {
    by_expiry_.erase(old->second.expiry);
    live_.erase(old);
  }
  auto expiry = by_expiry_.emplace(challenge.expires_at, challenge.challenge_id);
  std::string id = challenge.challenge_id;
  live_.emplace(std::move(id), Entry{std::move(challenge), expiry});
}

std::optional<Challenge> ChallengeTable::Take(const std::string& challenge_id,
                                              UnixSeconds now) {
  std::lock_guard lock(mu_);
  auto it = live_.find(challenge_id);
  if (it == live_.end()) return std::nullopt;
  Challenge c = std::move(it->second.challenge);
  by_expiry_.erase(it->second.expiry);
  live_.erase(it);
  if (now >= c.expires_at) return std::nullopt;
  return c;
}

std::size_t ChallengeTable::size() const {
  std::lock_guard lock(mu_);
  return live_.size();
}

// ---- PeerRegistry ---------------------------------------------------------

PeerRegistry::PeerRegistry(abs::TrusteePublicKey local_tpk,
                           TransportFactory factory)
    : tpk_(std::move(local_tpk)), factory_(std::move(factory)) {}

void PeerRegistry::Configure(PeerEntry entry) {
  ValidateIdentifier("peer domain_id", entry.domain_id);
  std::lock_guard lock(mu_);
  std::string id = entry.domain_id;
  peers_[id] = std::move(entry);
}

PeerEntry PeerRegistry::Register(const std::string& domain_id,
                                 const std::string& base_url) {
  ValidateIdentifier("peer domain_id", domain_id);
  PeerEntry entry;
  if (auto existing = Get(domain_id)) entry = std::move(*existing);
  entry.domain_id = domain_id;
  entry.base_url = base_url;

  // Network I/O happens outside the lock; only the final swap is serialized.
  auto transport = factory_(entry);
  abs::TrusteePublicKey peer_tpk = transport->FetchTpk();
  if (peer_tpk != tpk_) {
    throw Error(ErrorCode::kTpkMismatch,
                "peer '" + domain_id + "' serves a TPK of federation '" +
                    peer_tpk.federation_id + "'");
  }
  abs::AuthorityPublicKey apk = transport->FetchApk();
  if (apk.domain_id != domain_id) {
    throw Error(ErrorCode::kUnknownPeer,
                "peer at " + base_url + " identifies as '" + apk.domain_id +
                    "', expected '" + domain_id + "'");
  }
  entry.apk = std::move(apk);

  std::lock_guard lock(mu_);
  peers_[domain_id] = entry;
  return entry;
}

std::optional<PeerEntry> PeerRegistry::Get(const std::string& domain_id) const {
  std::lock_guard lock(mu_);
  auto it = peers_.find(domain_id);
  if (it == peers_.end()) return std::nullopt;
  return it->second;
}

bool PeerRegistry::Contains(const std::string& domain_id) const {
  std::lock_guard lock(mu_);
  return peers_.count(domain_id) != 0;
}

abs::AuthorityPublicKey PeerRegistry::RequireApk(const std::string& domain_id) {
  auto entry = Get(domain_id);
  if (!entry) {
    throw Error(ErrorCode::kUnknownPeer, "unknown peer '" + domain_id + "'");
  }
  if (entry->apk) return *entry->apk;
  return *Register(domain_id, entry->base_url).apk;
}

std::unique_ptr<PeerTransport> PeerRegistry::Connect(
    const std::string& domain_id) const {
  auto entry = Get(domain_id);
  if (!entry) {
    throw Error(ErrorCode::kUnknownPeer, "unknown peer '" + domain_id + "'");
  }
  return factory_(*entry);
}

// ---- Gateway --------------------------------------------------------------

Gateway::Gateway(GatewayOptions options, const Pap& pap, PeerRegistry& peers)
    : options_(std::move(options)), pap_(pap), peers_(peers) {}

void Gateway::Log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

std::vector<ResourceName> Gateway::ListResources() const {
  return pap_.ListResourceNames();
}

InitiateResponse Gateway::Initiate(const std::string& resource_id,
                                   const std::string& requester_domain) {
  Log("initiate resource=" + resource_id + " peer=" + requester_domain);
  if (!peers_.Contains(requester_domain)) {
    Log("initiate rejected: unknown peer " + requester_domain);
    throw Error(ErrorCode::kUnknownPeer,
                "unknown peer '" + requester_domain + "'");
  }
  auto record = pap_.GetResourceWithPolicy(resource_id);
  if (!record) {
    throw Error(ErrorCode::kUnknownResource,
                "unknown resource '" + resource_id + "'");
  }

  InitiateResponse out;
  if (!record->second) {
    out.decision = Decision::Permit();
    out.content = std::move(record->first.content);
    return out;
  }

  try {
    peers_.RequireApk(requester_domain);
  } catch (const Error& e) {
    Log(std::string("initiate rejected: no APK for peer: ") + e.what());
    throw Error(ErrorCode::kUnknownPeer,
                "peer '" + requester_domain + "' has no usable APK");
  }

  UnixSeconds now = options_.clock();
  Challenge c;
  c.challenge_id = crypto::RandomHex128();
  c.message = {resource_id, requester_domain, options_.domain_id,
               crypto::RandomHex128(), now};
  c.required = PolicyToRequiredPredicate(*record->second);
  c.resource_id = resource_id;
  c.peer_domain = requester_domain;
  c.expires_at = now + options_.challenge_ttl;

  out.challenge = ChallengeOffer{c.challenge_id, c.required, c.message};
  challenges_.Insert(std::move(c), now);
  return out;
}

CompleteResult Gateway::Complete(const std::string& challenge_id,
                                 std::span<const std::uint8_t> encoded_sig) {
  Log("complete challenge=" + challenge_id);
  CompleteResult out;
  out.decision = Decision::Deny(DenyReason::kBadSignature);

  auto challenge = challenges_.Take(challenge_id, options_.clock());
  if (!challenge) {
    out.decision = Decision::Deny(DenyReason::kExpiredChallenge);
    out.detail = "no live challenge";
    Log("complete deny: expired-challenge");
    return out;
  }

  auto record = pap_.GetResourceWithPolicy(challenge->resource_id);
  auto peer = peers_.Get(challenge->peer_domain);
  if (!record) {
    out.detail = "resource removed after initiate";
  } else if (!peer || !peer->apk) {
    out.detail = "peer APK no longer pinned";
  } else {
    ClaimPredicate expected;
    if (record->second) expected = PolicyToClaimPredicate(*record->second);
    auto start = Steady::now();
    bool ok = abs::Verify(options_.tpk, *peer->apk, challenge->message,
                          expected, encoded_sig);
    out.verify_s = SecondsSince(start);
    if (ok) {
      out.decision = Decision::Permit();
      out.content = std::move(record->first.content);
    } else {
      out.detail = "signature does not verify for the policy claim";
    }
  }
  Log("complete " + std::string(out.decision.permitted() ? "permit" : "deny") +
      (out.detail.empty() ? "" : ": " + out.detail));
  return out;
}

// ---- InProcessTransport ---------------------------------------------------

InProcessTransport::InProcessTransport(Gateway& gateway,
                                       abs::TrusteePublicKey tpk,
                                       abs::AuthorityPublicKey apk)
    : gateway_(gateway), tpk_(std::move(tpk)), apk_(std::move(apk)) {}

std::vector<ResourceName> InProcessTransport::ListResources() {
  return gateway_.ListResources();
}

InitiateResponse InProcessTransport::Initiate(
    const std::string& resource_id, const std::string& requester_domain) {
  try {
    return gateway_.Initiate(resource_id, requester_domain);
  } catch (const Error& e) {
    InitiateResponse out;
    if (e.code() == ErrorCode::kUnknownResource) {
      out.decision = Decision::Deny(DenyReason::kUnknownResource);
    } else if (e.code() == ErrorCode::kUnknownPeer) {
      out.decision = Decision::Deny(DenyReason::kUnknownPeer);
    } else {
      throw;
    }
    return out;
  }
}

CompleteResponse InProcessTransport::Complete(
    const std::string& challenge_id, std::span<const std::uint8_t> sig) {
  CompleteResult r = gateway_.Complete(challenge_id, sig);
  return {r.decision, std::move(r.content), r.verify_s};
}

// ---- Requester ------------------------------------------------------------

Requester::Requester(std::string domain_id, abs::TrusteePublicKey tpk,
                     const AttributeSource& pip, PeerRegistry& peers,
                     KeyCache& fresh_keys, KeyCache& cached_keys)
    : domain_id_(std::move(domain_id)),
      tpk_(std::move(tpk)),
      pip_(pip),
      peers_(peers),
      fresh_keys_(fresh_keys),
      cached_keys_(cached_keys) {}

std::vector<ResourceName> Requester::ListRemote(const std::string& peer_id) {
  return peers_.Connect(peer_id)->ListResources();
}

AccessOutcome Requester::RequestRemoteResource(const std::string& peer_id,
                                               const std::string& resource_id,
                                               const std::string& user_id,
                                               CacheMode mode) {
  const auto total_start = Steady::now();
  auto peer = peers_.Get(peer_id);
  if (!peer) throw Error(ErrorCode::kUnknownPeer, "unknown peer " + peer_id);
  auto transport = peers_.Connect(peer_id);

  AccessOutcome out;
  PhaseTimings& t = out.timings;

  auto start = Steady::now();
  InitiateResponse init = transport->Initiate(resource_id, domain_id_);
  t.initiate_s = SecondsSince(start);
  out.peer_calls.push_back("initiate");

  if (!init.challenge) {
    out.decision = init.decision.value_or(
        Decision::Deny(DenyReason::kUnknownResource));
    out.content = std::move(init.content);
    t.transfer_s = t.initiate_s;
    t.total_s = SecondsSince(total_start);
    return out;
  }
  const ChallengeOffer& offer = *init.challenge;
  if (offer.message.requester_domain != domain_id_ ||
      offer.message.verifier_domain != peer_id ||
      offer.message.resource_id != resource_id) {
    throw Error(ErrorCode::kMalformed,
                "challenge message is not addressed to this request");
  }

  start = Steady::now();
  ResolvedNames resolved = ResolveNames(offer.required, peer->aliases);
  std::vector<Attribute> local =
      pip_.Query(user_id, resolved.localized.leaves());
  std::vector<Attribute> renamed = ApplyAliases(local, resolved.reverse);
  ClaimPredicate claim = BuildClaimPredicate(offer.required, renamed);
  t.pip_s = SecondsSince(start);

  KeyCache& cache = mode == CacheMode::kFresh ? fresh_keys_ : cached_keys_;
  KeyLookup keys = cache.GetOrCreate(claim.leaves(), claim);
  t.asetup_s = keys.timings.asetup_s;
  t.attrgen_s = keys.timings.attrgen_s;

  start = Steady::now();
  abs::AbsSignature sig =
      abs::Sign(tpk_, keys.bundle->authority.apk, keys.bundle->ska,
                offer.message, claim, keys.bundle->endorsement);
  Bytes encoded = abs::Encode(sig);
  t.sign_s = SecondsSince(start);

  start = Steady::now();
  CompleteResponse done = transport->Complete(offer.challenge_id, encoded);
  t.complete_s = SecondsSince(start);
  out.peer_calls.push_back("complete");
  t.verify_s = done.verify_s;
  t.transfer_s = *t.initiate_s + *t.complete_s - done.verify_s.value_or(0.0);

  out.decision = done.decision;
  out.content = std::move(done.content);
  t.total_s = SecondsSince(total_start);
  return out;
}

}  // namespace dpip
