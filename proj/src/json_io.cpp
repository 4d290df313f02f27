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

#include "dpip/json_io.hpp"

namespace dpip {

namespace {

Category CategoryFromJson(const Json& j) {
  auto c = ParseCategory(JsonString(j, "category"));
  if (!c) throw Error(ErrorCode::kMalformed, "unknown attribute category");
  return *c;
}

void RequireArray(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kMalformed, std::string(what) + " must be an array");
  }
}

}  // namespace

std::string JsonString(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kMalformed,
                std::string("expected string member '") + key + "'");
  }
  return j[key].get<std::string>();
}

Json ToJson(const Attribute& attr) {
  return {{"category", CategoryName(attr.category)},
          {"name", attr.name},
          {"value", attr.value}};
}

Attribute AttributeFromJson(const Json& j) {
  return Attribute::Make(CategoryFromJson(j), JsonString(j, "name"),
                         JsonString(j, "value"));
}

Json ToJson(std::span<const Attribute> attrs) {
  Json out = Json::array();
  for (const auto& a : attrs) out.push_back(ToJson(a));
  return out;
}

std::vector<Attribute> AttributesFromJson(const Json& j) {
  RequireArray(j, "attributes");
  std::vector<Attribute> out;
  for (const auto& item : j) out.push_back(AttributeFromJson(item));
  return out;
}

Json ToJson(const Policy& policy) {
  return {{"resource_id", policy.resource_id},
          {"entries", ToJson(std::span<const Attribute>(policy.entries))}};
}

Policy PolicyFromJson(const Json& j) {
  auto resource_id = JsonString(j, "resource_id");
  std::vector<Attribute> entries;
  if (j.contains("entries")) entries = AttributesFromJson(j["entries"]);
  return Policy::Make(std::move(resource_id), std::move(entries));
}

Json ToJson(const RequiredPredicate& predicate) {
  Json out = Json::array();
  for (const auto& leaf : predicate.leaves()) {
    out.push_back(
        {{"category", CategoryName(leaf.category)}, {"name", leaf.name}});
  }
  return out;
}

RequiredPredicate RequiredPredicateFromJson(const Json& j) {
  RequireArray(j, "required");
  std::vector<AttributeName> leaves;
  for (const auto& item : j) {
    leaves.push_back({CategoryFromJson(item), JsonString(item, "name")});
  }
  return RequiredPredicate::FromLeaves(std::move(leaves));
}

Json ToJson(const AccessMessage& message) {
  return {{"resource_id", message.resource_id},
          {"requester_domain", message.requester_domain},
          {"verifier_domain", message.verifier_domain},
          {"nonce", message.nonce},
          {"issued_at", FormatTimestamp(message.issued_at)}};
}

AccessMessage AccessMessageFromJson(const Json& j) {
  AccessMessage m;
  m.resource_id = JsonString(j, "resource_id");
  m.requester_domain = JsonString(j, "requester_domain");
  m.verifier_domain = JsonString(j, "verifier_domain");
  m.nonce = JsonString(j, "nonce");
  auto ts = ParseTimestamp(JsonString(j, "issued_at"));
  if (!ts) throw Error(ErrorCode::kMalformed, "bad issued_at timestamp");
  m.issued_at = *ts;
  ValidateIdentifier("resource_id", m.resource_id);
  ValidateIdentifier("requester_domain", m.requester_domain);
  ValidateIdentifier("verifier_domain", m.verifier_domain);
  ValidateIdentifier("nonce", m.nonce);
  return m;
}

Json ToJson(const Decision& decision) {
  Json out = {{"decision", decision.permitted() ? "permit" : "deny"}};
  if (!decision.permitted()) out["reason"] = decision.reason();
  return out;
}

}  // namespace dpip
