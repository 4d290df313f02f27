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

#include "dpip/model.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <ctime>
#include <set>

namespace dpip {

namespace {

constexpr std::array<std::string_view, 4> kCategoryNames = {
    "Subject", "Action", "Resource", "Environment"};

constexpr std::array<std::string_view, 6> kDenyCodes = {
    "missing-attribute", "value-mismatch",   "bad-signature",
    "expired-challenge", "unknown-resource", "unknown-peer"};

bool IsNameChar(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
}

bool HasControlChar(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x20 || c == 0x7F;
  });
}

void Append(Bytes& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kMissingAttribute: return "missing-attribute";
    case ErrorCode::kDuplicateAttribute: return "duplicate-attribute";
    case ErrorCode::kAliasCollision: return "alias-collision";
    case ErrorCode::kPredicateUnsatisfied: return "predicate-unsatisfied";
    case ErrorCode::kUnknownUser: return "unknown-user";
    case ErrorCode::kUnknownResource: return "unknown-resource";
    case ErrorCode::kUnknownPeer: return "unknown-peer";
    case ErrorCode::kAuthFailure: return "auth-failure";
    case ErrorCode::kTpkMismatch: return "tpk-mismatch";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

std::string_view CategoryName(Category category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<Category> ParseCategory(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == text) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::string ToString(const AttributeName& name) {
  std::string out(CategoryName(name.category));
  out += ':';
  out += name.name;
  return out;
}

void ValidateAttributeName(std::string_view name) {
  if (name.empty() || !std::all_of(name.begin(), name.end(), IsNameChar)) {
    throw Error(ErrorCode::kInvalidArgument,
                "attribute name must match [A-Za-z0-9_.-]+: '" +
                    std::string(name) + "'");
  }
}

void ValidateAttributeValue(std::string_view value) {
  if (value.empty() || HasControlChar(value)) {
    throw Error(ErrorCode::kInvalidArgument,
                "attribute value must be non-empty text without control "
                "characters");
  }
}

void ValidateIdentifier(std::string_view what, std::string_view id) {
  if (id.empty() || HasControlChar(id)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be non-empty without control "
                                    "characters");
  }
}

Attribute Attribute::Make(Category category, std::string name,
                          std::string value) {
  ValidateAttributeName(name);
  ValidateAttributeValue(value);
  return {category, std::move(name), std::move(value)};
}

Policy Policy::Make(std::string resource_id, std::vector<Attribute> entries) {
  ValidateIdentifier("resource_id", resource_id);
  std::set<AttributeName> seen;
  for (const auto& e : entries) {
    ValidateAttributeName(e.name);
    ValidateAttributeValue(e.value);
    if (!seen.insert(e.key()).second) {
      throw Error(ErrorCode::kDuplicateAttribute,
                  "policy repeats attribute " + ToString(e.key()));
    }
  }
  return {std::move(resource_id), std::move(entries)};
}

RequiredPredicate RequiredPredicate::FromLeaves(
    std::vector<AttributeName> leaves) {
  std::sort(leaves.begin(), leaves.end());
  auto dup = std::adjacent_find(leaves.begin(), leaves.end());
  if (dup != leaves.end()) {
    throw Error(ErrorCode::kDuplicateAttribute,
                "predicate repeats leaf " + ToString(*dup));
  }
  for (const auto& l : leaves) ValidateAttributeName(l.name);
  RequiredPredicate p;
  p.leaves_ = std::move(leaves);
  return p;
}

ClaimPredicate ClaimPredicate::FromLeaves(std::vector<Attribute> leaves) {
  std::sort(leaves.begin(), leaves.end(),
            [](const Attribute& a, const Attribute& b) {
              return a.key() < b.key();
            });
  auto dup = std::adjacent_find(
      leaves.begin(), leaves.end(),
      [](const Attribute& a, const Attribute& b) { return a.key() == b.key(); });
  if (dup != leaves.end()) {
    throw Error(ErrorCode::kDuplicateAttribute,
                "claim predicate repeats leaf " + ToString(dup->key()));
  }
  for (const auto& l : leaves) {
    ValidateAttributeName(l.name);
    ValidateAttributeValue(l.value);
  }
  ClaimPredicate p;
  p.leaves_ = std::move(leaves);
  return p;
}

RequiredPredicate ClaimPredicate::names() const {
  std::vector<AttributeName> names;
  names.reserve(leaves_.size());
  for (const auto& l : leaves_) names.push_back(l.key());
  return RequiredPredicate::FromLeaves(std::move(names));
}

std::string_view DenyReasonCode(DenyReason reason) {
  return kDenyCodes[static_cast<std::size_t>(reason)];
}

std::optional<DenyReason> ParseDenyReason(std::string_view code) {
  for (std::size_t i = 0; i < kDenyCodes.size(); ++i) {
    if (kDenyCodes[i] == code) return static_cast<DenyReason>(i);
  }
  return std::nullopt;
}

std::string_view Decision::reason() const {
  if (permitted() || !deny_reason) return "ok";
  return DenyReasonCode(*deny_reason);
}

void AliasMap::Insert(const AttributeName& remote, const AttributeName& local) {
  ValidateAttributeName(remote.name);
  ValidateAttributeName(local.name);
  for (const auto& [from, to] : mapping_) {
    if (to == local && from != remote) {
      throw Error(ErrorCode::kAliasCollision,
                  ToString(from) + " and " + ToString(remote) +
                      " both map to " + ToString(local));
    }
  }
  mapping_[remote] = local;
}

AttributeName AliasMap::Apply(const AttributeName& remote) const {
  auto it = mapping_.find(remote);
  return it == mapping_.end() ? remote : it->second;
}

namespace {

std::string JoinNames(const std::vector<AttributeName>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += ToString(n);
  }
  return out;
}

}  // namespace

MissingAttributeError::MissingAttributeError(std::vector<AttributeName> missing)
    : Error(ErrorCode::kMissingAttribute,
            "missing attributes: " + JoinNames(missing)),
      missing_(std::move(missing)) {}

RequiredPredicate PolicyToRequiredPredicate(const Policy& policy) {
  std::vector<AttributeName> leaves;
  leaves.reserve(policy.entries.size());
  for (const auto& e : policy.entries) leaves.push_back(e.key());
  return RequiredPredicate::FromLeaves(std::move(leaves));
}

ClaimPredicate PolicyToClaimPredicate(const Policy& policy) {
  return ClaimPredicate::FromLeaves(policy.entries);
}

ClaimPredicate BuildClaimPredicate(const RequiredPredicate& required,
                                   std::span<const Attribute> attrs) {
  std::vector<Attribute> leaves;
  std::vector<AttributeName> missing;
  for (const auto& leaf : required.leaves()) {
    auto it = std::find_if(attrs.begin(), attrs.end(), [&](const Attribute& a) {
      return a.key() == leaf;
    });
    if (it == attrs.end()) {
      missing.push_back(leaf);
    } else {
      leaves.push_back(*it);
    }
  }
  if (!missing.empty()) throw MissingAttributeError(std::move(missing));
  return ClaimPredicate::FromLeaves(std::move(leaves));
}

bool Satisfies(const ClaimPredicate& claim, const Policy& policy) {
  return claim.leaves() == PolicyToClaimPredicate(policy).leaves();
}

Decision EvaluatePolicy(std::span<const Attribute> request_attrs,
                        const Policy& policy) {
  bool mismatch = false;
  for (const auto& entry : policy.entries) {
    auto it = std::find_if(
        request_attrs.begin(), request_attrs.end(),
        [&](const Attribute& a) { return a.key() == entry.key(); });
    if (it == request_attrs.end()) {
      return Decision::Deny(DenyReason::kMissingAttribute);
    }
    if (it->value != entry.value) mismatch = true;
  }
  return mismatch ? Decision::Deny(DenyReason::kValueMismatch)
                  : Decision::Permit();
}

ResolvedNames ResolveNames(const RequiredPredicate& required,
                           const AliasMap& aliases) {
  ResolvedNames out;
  std::vector<AttributeName> localized;
  localized.reserve(required.size());
  for (const auto& leaf : required.leaves()) {
    AttributeName local = aliases.Apply(leaf);
    if (std::find(localized.begin(), localized.end(), local) !=
        localized.end()) {
      throw Error(ErrorCode::kAliasCollision,
                  "two required leaves resolve to " + ToString(local));
    }
    localized.push_back(local);
    if (local != leaf) out.reverse.Insert(local, leaf);
  }
  out.localized = RequiredPredicate::FromLeaves(std::move(localized));
  return out;
}

std::vector<Attribute> ApplyAliases(std::span<const Attribute> attrs,
                                    const AliasMap& map) {
  std::vector<Attribute> out;
  out.reserve(attrs.size());
  for (const auto& a : attrs) {
    AttributeName renamed = map.Apply(a.key());
    out.push_back({renamed.category, std::move(renamed.name), a.value});
  }
  return out;
}

Bytes CanonicalBytes(const RequiredPredicate& predicate) {
  Bytes out{'R', kRecordSeparator};
  for (const auto& leaf : predicate.leaves()) {
    Append(out, CategoryName(leaf.category));
    out.push_back(kUnitSeparator);
    Append(out, leaf.name);
    out.push_back(kRecordSeparator);
  }
  return out;
}

Bytes CanonicalLeafBytes(const Attribute& leaf) {
  Bytes out;
  Append(out, CategoryName(leaf.category));
  out.push_back(kUnitSeparator);
  Append(out, leaf.name);
  out.push_back(kUnitSeparator);
  Append(out, leaf.value);
  out.push_back(kRecordSeparator);
  return out;
}

Bytes CanonicalBytes(const ClaimPredicate& predicate) {
  Bytes out{'C', kRecordSeparator};
  for (const auto& leaf : predicate.leaves()) {
    Bytes record = CanonicalLeafBytes(leaf);
    out.insert(out.end(), record.begin(), record.end());
  }
  return out;
}

Bytes CanonicalBytes(const AccessMessage& message) {
  Bytes out{'M', kRecordSeparator};
  Append(out, message.resource_id);
  out.push_back(kUnitSeparator);
  Append(out, message.requester_domain);
  out.push_back(kUnitSeparator);
  Append(out, message.verifier_domain);
  out.push_back(kUnitSeparator);
  Append(out, message.nonce);
  out.push_back(kUnitSeparator);
  Append(out, FormatTimestamp(message.issued_at));
  out.push_back(kRecordSeparator);
  return out;
}

std::string FormatTimestamp(UnixSeconds t) {
  std::time_t secs = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<UnixSeconds> ParseTimestamp(std::string_view text) {
  if (text.size() != 20) return std::nullopt;
  std::tm tm{};
  int consumed = 0;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year,
                  &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &tm.tm_sec, &consumed) != 6 ||
      consumed != 20) {
    return std::nullopt;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t secs = timegm(&tm);
  UnixSeconds parsed{std::chrono::seconds(secs)};
  if (FormatTimestamp(parsed) != text) return std::nullopt;
  return parsed;
}

}  // namespace dpip
