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

// Per-domain policy entities: the attribute store (PIP), the resource and
// policy store (PAP) and the decision engine (PDP). Each store is a JSON
// document under the domain data directory, held in memory and rewritten
// atomically on every mutation.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dpip/model.hpp"

namespace dpip {

struct UserRecord {
  std::string user_id;
  std::vector<Attribute> attributes;

  // Throws kDuplicateAttribute on a repeated (category, name).
  static UserRecord Make(std::string user_id, std::vector<Attribute> attrs);
};

struct ResourceRecord {
  std::string resource_id;
  std::string display_name;
  Bytes content;
  bool is_protected = false;  // derived from the policy store on read
};

struct ResourceName {
  std::string resource_id;
  std::string display_name;

  bool operator==(const ResourceName&) const = default;
};

class AdminAuthenticator {
 public:
  virtual ~AdminAuthenticator() = default;
  virtual bool Authorize(std::string_view bearer_token) const = 0;
};

class StaticTokenAuthenticator : public AdminAuthenticator {
 public:
  // An empty configured token rejects everything.
  explicit StaticTokenAuthenticator(std::string token)
      : token_(std::move(token)) {}
  bool Authorize(std::string_view bearer_token) const override;

 private:
  std::string token_;
};

// Where the PDP fetches attributes it was not handed.
class AttributeSource {
 public:
  virtual ~AttributeSource() = default;
  // Only `user_id`'s own attributes whose (category, name) is in `wanted`.
  // Throws kUnknownUser.
  virtual std::vector<Attribute> Query(
      const std::string& user_id,
      std::span<const AttributeName> wanted) const = 0;
};

class Pip : public AttributeSource {
 public:
  // Empty path: in-memory only.
  Pip(const AdminAuthenticator& auth, std::filesystem::path store_path = {});

  std::vector<Attribute> Query(
      const std::string& user_id,
      std::span<const AttributeName> wanted) const override;

  // Upsert. Throws kAuthFailure before touching anything.
  void PutUser(std::string_view token, UserRecord user);
  bool HasUser(const std::string& user_id) const;

 private:
  void Save() const;

  const AdminAuthenticator& auth_;
  std::filesystem::path store_path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, UserRecord> users_;
};

class Pap {
 public:
  Pap(const AdminAuthenticator& auth, std::filesystem::path resources_path = {},
      std::filesystem::path policies_path = {});

  // Upserts; throws kAuthFailure.
  std::string PutResource(std::string_view token, ResourceRecord resource);
  // Throws kAuthFailure, or kUnknownResource when the resource does not
  // exist. A policy with no entries removes protection.
  void PutPolicy(std::string_view token, Policy policy);

  std::optional<Policy> GetPolicy(const std::string& resource_id) const;
  std::optional<ResourceRecord> GetResource(
      const std::string& resource_id) const;
  // Resource and policy read under one lock.
  std::optional<std::pair<ResourceRecord, std::optional<Policy>>>
  GetResourceWithPolicy(const std::string& resource_id) const;

  // Ids and display names only, sorted by id.
  std::vector<ResourceName> ListResourceNames() const;

 private:
  void SaveResources() const;
  void SavePolicies() const;

  const AdminAuthenticator& auth_;
  std::filesystem::path resources_path_;
  std::filesystem::path policies_path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ResourceRecord> resources_;
  std::map<std::string, Policy> policies_;
};

class Pdp {
 public:
  Pdp(const Pap& pap, const AttributeSource& pip) : pap_(pap), pip_(pip) {}

  // Fetches the policy, asks the PIP for exactly the names the request did
  // not carry, then evaluates. Never throws; failures become Deny.
  Decision Decide(std::span<const Attribute> request_attrs,
                  const std::string& user_id,
                  const std::string& resource_id) const;

 private:
  const Pap& pap_;
  const AttributeSource& pip_;
};

}  // namespace dpip
