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

// Access-control vocabulary shared by every other module: attributes,
// policies, the two predicate forms exchanged between domains, decisions,
// and the canonical byte encoding used for signing and cache keys.

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpip/error.hpp"

namespace dpip {

using Bytes = std::vector<std::uint8_t>;
using UnixSeconds = std::chrono::sys_seconds;

enum class Category : std::uint8_t {
  kSubject,
  kAction,
  kResource,
  kEnvironment,
};

std::string_view CategoryName(Category category);
std::optional<Category> ParseCategory(std::string_view text);

// Identity of an attribute inside a policy or predicate. Values are opaque.
struct AttributeName {
  Category category = Category::kSubject;
  std::string name;

  auto operator<=>(const AttributeName&) const = default;
};

std::string ToString(const AttributeName& name);

struct Attribute {
  Category category = Category::kSubject;
  std::string name;
  std::string value;

  // Throws kInvalidArgument unless name matches [A-Za-z0-9_.-]+ and value is
  // non-empty printable text.
  static Attribute Make(Category category, std::string name,
                        std::string value);

  AttributeName key() const { return {category, name}; }
  auto operator<=>(const Attribute&) const = default;
};

void ValidateAttributeName(std::string_view name);
void ValidateAttributeValue(std::string_view value);
// Resource and domain identifiers: non-empty, no control characters.
void ValidateIdentifier(std::string_view what, std::string_view id);

struct Policy {
  std::string resource_id;
  std::vector<Attribute> entries;  // empty: resource is unprotected

  // Validates every entry and rejects a repeated (category, name).
  static Policy Make(std::string resource_id, std::vector<Attribute> entries);

  bool unprotected() const { return entries.empty(); }
  bool operator==(const Policy&) const = default;
};

// Conjunction of attribute names the verifier demands.
class RequiredPredicate {
 public:
  RequiredPredicate() = default;
  // Sorts the leaves; throws kDuplicateAttribute on a repeated leaf.
  static RequiredPredicate FromLeaves(std::vector<AttributeName> leaves);

  const std::vector<AttributeName>& leaves() const { return leaves_; }
  bool empty() const { return leaves_.empty(); }
  std::size_t size() const { return leaves_.size(); }
  bool operator==(const RequiredPredicate&) const = default;

 private:
  std::vector<AttributeName> leaves_;
};

// Conjunction of name-value pairs a signature attests.
class ClaimPredicate {
 public:
  ClaimPredicate() = default;
  // Sorts the leaves; throws kDuplicateAttribute on a repeated
  // (category, name).
  static ClaimPredicate FromLeaves(std::vector<Attribute> leaves);

  const std::vector<Attribute>& leaves() const { return leaves_; }
  bool empty() const { return leaves_.empty(); }
  std::size_t size() const { return leaves_.size(); }
  RequiredPredicate names() const;
  bool operator==(const ClaimPredicate&) const = default;

 private:
  std::vector<Attribute> leaves_;
};

struct AccessMessage {
  std::string resource_id;
  std::string requester_domain;
  std::string verifier_domain;
  std::string nonce;  // 32 lowercase hex digits
  UnixSeconds issued_at{};

  bool operator==(const AccessMessage&) const = default;
};

enum class DenyReason {
  kMissingAttribute,
  kValueMismatch,
  kBadSignature,
  kExpiredChallenge,
  kUnknownResource,
  kUnknownPeer,
};

std::string_view DenyReasonCode(DenyReason reason);
std::optional<DenyReason> ParseDenyReason(std::string_view code);

struct Decision {
  enum class Outcome { kPermit, kDeny };

  Outcome outcome = Outcome::kDeny;
  std::optional<DenyReason> deny_reason;  // set iff outcome == kDeny

  static Decision Permit() { return {Outcome::kPermit, std::nullopt}; }
  static Decision Deny(DenyReason reason) { return {Outcome::kDeny, reason}; }

  bool permitted() const { return outcome == Outcome::kPermit; }
  // "ok" for Permit, otherwise the deny reason code.
  std::string_view reason() const;
  bool operator==(const Decision&) const = default;
};

// Renames a peer's attribute names onto local ones. Injective; names without
// an entry map to themselves.
class AliasMap {
 public:
  // Throws kAliasCollision if `local` is already the image of another name.
  void Insert(const AttributeName& remote, const AttributeName& local);
  AttributeName Apply(const AttributeName& remote) const;
  bool empty() const { return mapping_.empty(); }
  const std::map<AttributeName, AttributeName>& mapping() const {
    return mapping_;
  }

 private:
  std::map<AttributeName, AttributeName> mapping_;
};

// Raised by BuildClaimPredicate; lists every leaf that found no attribute.
class MissingAttributeError : public Error {
 public:
  explicit MissingAttributeError(std::vector<AttributeName> missing);
  const std::vector<AttributeName>& missing() const { return missing_; }

 private:
  std::vector<AttributeName> missing_;
};

RequiredPredicate PolicyToRequiredPredicate(const Policy& policy);
ClaimPredicate PolicyToClaimPredicate(const Policy& policy);

ClaimPredicate BuildClaimPredicate(const RequiredPredicate& required,
                                   std::span<const Attribute> attrs);

bool Satisfies(const ClaimPredicate& claim, const Policy& policy);

// Missing-attribute outranks value-mismatch when both occur.
Decision EvaluatePolicy(std::span<const Attribute> request_attrs,
                        const Policy& policy);

struct ResolvedNames {
  RequiredPredicate localized;
  AliasMap reverse;  // local name -> the verifier's name
};

ResolvedNames ResolveNames(const RequiredPredicate& required,
                           const AliasMap& aliases);

// Renames attributes through `map`, keeping values.
std::vector<Attribute> ApplyAliases(std::span<const Attribute> attrs,
                                    const AliasMap& map);

// Canonical encoding (see docs/formats.md): a one-byte type tag and RS, then
// one record per leaf with fields joined by US (0x1F) and terminated by
// RS (0x1E).
inline constexpr std::uint8_t kUnitSeparator = 0x1F;
inline constexpr std::uint8_t kRecordSeparator = 0x1E;

Bytes CanonicalBytes(const RequiredPredicate& predicate);
Bytes CanonicalBytes(const ClaimPredicate& predicate);
Bytes CanonicalBytes(const AccessMessage& message);
// A single leaf record, without a type tag.
Bytes CanonicalLeafBytes(const Attribute& leaf);

std::string FormatTimestamp(UnixSeconds t);
std::optional<UnixSeconds> ParseTimestamp(std::string_view text);

}  // namespace dpip
