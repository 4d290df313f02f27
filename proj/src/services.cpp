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

#include "dpip/services.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "dpip/crypto.hpp"
#include "json_file.hpp"

namespace dpip {

namespace {

void RequireAdmin(const AdminAuthenticator& auth, std::string_view token) {
  if (!auth.Authorize(token)) {
    throw Error(ErrorCode::kAuthFailure, "admin token rejected");
  }
}

Json UserToJson(const UserRecord& u) {
  return {{"user_id", u.user_id},
          {"attributes", ToJson(std::span<const Attribute>(u.attributes))}};
}

Json ResourceToJson(const ResourceRecord& r) {
  return {{"resource_id", r.resource_id},
          {"display_name", r.display_name},
          {"content_b64", crypto::ToBase64(r.content)}};
}

ResourceRecord ResourceFromJson(const Json& j) {
  ResourceRecord r;
  r.resource_id = JsonString(j, "resource_id");
  r.display_name = JsonString(j, "display_name");
  auto content = crypto::FromBase64(JsonString(j, "content_b64"));
  if (!content) throw Error(ErrorCode::kMalformed, "bad content_b64");
  r.content = std::move(*content);
  ValidateIdentifier("resource_id", r.resource_id);
  return r;
}

const Json& ArrayMember(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_array()) {
    throw Error(ErrorCode::kMalformed,
                std::string("store document lacks array '") + key + "'");
  }
  return doc[key];
}

}  // namespace

UserRecord UserRecord::Make(std::string user_id, std::vector<Attribute> attrs) {
  ValidateIdentifier("user_id", user_id);
  std::set<AttributeName> seen;
  for (const auto& a : attrs) {
    ValidateAttributeName(a.name);
    ValidateAttributeValue(a.value);
    if (!seen.insert(a.key()).second) {
      throw Error(ErrorCode::kDuplicateAttribute,
                  "user repeats attribute " + ToString(a.key()));
    }
  }
  return {std::move(user_id), std::move(attrs)};
}

bool StaticTokenAuthenticator::Authorize(std::string_view bearer_token) const {
  return !token_.empty() && crypto::ConstantTimeEquals(token_, bearer_token);
}

// ---- PIP -------------------------------------------------------------------

Pip::Pip(const AdminAuthenticator& auth, std::filesystem::path store_path)
    : auth_(auth), store_path_(std::move(store_path)) {
  if (store_path_.empty()) return;
  Json doc = ReadJsonFile(store_path_, {{"users", Json::array()}});
  for (const auto& item : ArrayMember(doc, "users")) {
    auto user = UserRecord::Make(JsonString(item, "user_id"),
                                 AttributesFromJson(item["attributes"]));
    users_[user.user_id] = std::move(user);
  }
}

std::vector<Attribute> Pip::Query(const std::string& user_id,
                                  std::span<const AttributeName> wanted) const {
  std::shared_lock lock(mu_);
  auto it = users_.find(user_id);
  if (it == users_.end()) {
    throw Error(ErrorCode::kUnknownUser, "unknown user '" + user_id + "'");
  }
  std::vector<Attribute> out;
  for (const auto& a : it->second.attributes) {
    if (std::find(wanted.begin(), wanted.end(), a.key()) != wanted.end()) {
      out.push_back(a);
    }
  }
  return out;
}

void Pip::PutUser(std::string_view token, UserRecord user) {
  RequireAdmin(auth_, token);
  std::unique_lock lock(mu_);
  auto previous = users_;
  users_[user.user_id] = std::move(user);
  try {
    Save();
  } catch (...) {
    users_ = std::move(previous);
    throw;
  }
}

bool Pip::HasUser(const std::string& user_id) const {
  std::shared_lock lock(mu_);
  return users_.count(user_id) != 0;
}

void Pip::Save() const {
  if (store_path_.empty()) return;
  Json users = Json::array();
  for (const auto& [id, u] : users_) users.push_back(UserToJson(u));
  WriteJsonFileAtomic(store_path_, {{"users", users}});
}

// ---- PAP -------------------------------------------------------------------

Pap::Pap(const AdminAuthenticator& auth, std::filesystem::path resources_path,
         std::filesystem::path policies_path)
    : auth_(auth),
      resources_path_(std::move(resources_path)),
      policies_path_(std::move(policies_path)) {
  if (!resources_path_.empty()) {
    Json doc = ReadJsonFile(resources_path_, {{"resources", Json::array()}});
    for (const auto& item : ArrayMember(doc, "resources")) {
      auto r = ResourceFromJson(item);
      resources_[r.resource_id] = std::move(r);
    }
  }
  if (!policies_path_.empty()) {
    Json doc = ReadJsonFile(policies_path_, {{"policies", Json::array()}});
    for (const auto& item : ArrayMember(doc, "policies")) {
      auto p = PolicyFromJson(item);
      if (!p.unprotected()) policies_[p.resource_id] = std::move(p);
    }
  }
}

std::string Pap::PutResource(std::string_view token, ResourceRecord resource) {
  RequireAdmin(auth_, token);
  ValidateIdentifier("resource_id", resource.resource_id);
  std::unique_lock lock(mu_);
  std::string id = resource.resource_id;
  auto previous = resources_;
  resources_[id] = std::move(resource);
  try {
    SaveResources();
  } catch (...) {
    resources_ = std::move(previous);
    throw;
  }
  return id;
}

void Pap::PutPolicy(std::string_view token, Policy policy) {
  RequireAdmin(auth_, token);
  std::unique_lock lock(mu_);
  if (!resources_.count(policy.resource_id)) {
    throw Error(ErrorCode::kUnknownResource,
                "no resource '" + policy.resource_id + "'");
  }
  auto previous = policies_;
  if (policy.unprotected()) {
    policies_.erase(policy.resource_id);
  } else {
    std::string id = policy.resource_id;
    policies_[id] = std::move(policy);
  }
  try {
    SavePolicies();
  } catch (...) {
    policies_ = std::move(previous);
    throw;
  }
}

std::optional<Policy> Pap::GetPolicy(const std::string& resource_id) const {
  std::shared_lock lock(mu_);
  auto it = policies_.find(resource_id);
  if (it == policies_.end()) return std::nullopt;
  return it->second;
}

std::optional<ResourceRecord> Pap::GetResource(
    const std::string& resource_id) const {
  auto both = GetResourceWithPolicy(resource_id);
  if (!both) return std::nullopt;
  return both->first;
}

std::optional<std::pair<ResourceRecord, std::optional<Policy>>>
Pap::GetResourceWithPolicy(const std::string& resource_id) const {
  std::shared_lock lock(mu_);
  auto it = resources_.find(resource_id);
  if (it == resources_.end()) return std::nullopt;
  std::pair<ResourceRecord, std::optional<Policy>> out{it->second,
                                                       std::nullopt};
  if (auto p = policies_.find(resource_id); p != policies_.end()) {
    out.second = p->second;
  }
  out.first.is_protected = out.second.has_value();
  return out;
}

std::vector<ResourceName> Pap::ListResourceNames() const {
  std::shared_lock lock(mu_);
  std::vector<ResourceName> out;
  out.reserve(resources_.size());
  for (const auto& [id, r] : resources_) {
    out.push_back({r.resource_id, r.display_name});
  }
  return out;
}

void Pap::SaveResources() const {
  if (resources_path_.empty()) return;
  Json items = Json::array();
  for (const auto& [id, r] : resources_) items.push_back(ResourceToJson(r));
  WriteJsonFileAtomic(resources_path_, {{"resources", items}});
}

void Pap::SavePolicies() const {
  if (policies_path_.empty()) return;
  Json items = Json::array();
  for (const auto& [id, p] : policies_) items.push_back(ToJson(p));
  WriteJsonFileAtomic(policies_path_, {{"policies", items}});
}

// ---- PDP -------------------------------------------------------------------

Decision Pdp::Decide(std::span<const Attribute> request_attrs,
                     const std::string& user_id,
                     const std::string& resource_id) const {
  auto record = pap_.GetResourceWithPolicy(resource_id);
  if (!record) return Decision::Deny(DenyReason::kUnknownResource);
  if (!record->second) return Decision::Permit();
  const Policy& policy = *record->second;

  std::vector<AttributeName> missing;
  for (const auto& entry : policy.entries) {
    bool supplied = std::any_of(
        request_attrs.begin(), request_attrs.end(),
        [&](const Attribute& a) { return a.key() == entry.key(); });
    if (!supplied) missing.push_back(entry.key());
  }

  std::vector<Attribute> merged(request_attrs.begin(), request_attrs.end());
  if (!missing.empty()) {
    try {
      auto fetched = pip_.Query(user_id, missing);
      merged.insert(merged.end(), fetched.begin(), fetched.end());
    } catch (const Error&) {
      return Decision::Deny(DenyReason::kMissingAttribute);
    }
  }
  return EvaluatePolicy(merged, policy);
}

}  // namespace dpip
