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

#include <vector>

#include "json.hpp"

#include "dpip/model.hpp"

namespace dpip {

using Json = nlohmann::json;

// All *FromJson functions throw Error(kMalformed) on shape errors and
// Error(kInvalidArgument) on values that fail model validation.

Json ToJson(const Attribute& attr);
Attribute AttributeFromJson(const Json& j);

Json ToJson(std::span<const Attribute> attrs);
std::vector<Attribute> AttributesFromJson(const Json& j);

// {resource_id, entries: [{category, name, value}]}
Json ToJson(const Policy& policy);
Policy PolicyFromJson(const Json& j);

// [{category, name}]
Json ToJson(const RequiredPredicate& predicate);
RequiredPredicate RequiredPredicateFromJson(const Json& j);

Json ToJson(const AccessMessage& message);
AccessMessage AccessMessageFromJson(const Json& j);

Json ToJson(const Decision& decision);

// Reads a required string member.
std::string JsonString(const Json& j, const char* key);

}  // namespace dpip
