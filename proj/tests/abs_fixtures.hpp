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

// Random inputs for the signature contract tests.

#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dpip/crypto.hpp"
#include "dpip/model.hpp"

namespace dpip::testing_support {

// `n` attributes with distinct (category, name). With `names` > 0 the names
// come from a pool of that size (n <= names); with `values` > 0 values come
// from that many choices.
inline std::vector<Attribute> RandomAttributes(std::mt19937_64& rng,
                                               std::size_t n,
                                               std::size_t names = 0,
                                               std::size_t values = 0) {
  static const Category kCats[] = {Category::kSubject, Category::kAction,
                                   Category::kResource,
                                   Category::kEnvironment};
  std::vector<std::string> pool;
  std::size_t pool_size = names ? names : 64;
  for (std::size_t i = 0; i < pool_size; ++i) {
    pool.push_back("attr" + std::to_string(i));
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<Attribute> out;
  for (std::size_t i = 0; i < n && i < pool.size(); ++i) {
    Category c = names ? Category::kSubject : kCats[rng() % 4];
    std::string v = values ? "v" + std::to_string(rng() % values)
                           : "value " + std::to_string(rng() % 100000);
    out.push_back(Attribute::Make(c, pool[i], v));
  }
  return out;
}

// Non-empty random subset.
inline std::vector<Attribute> RandomSubset(std::mt19937_64& rng,
                                           const std::vector<Attribute>& all) {
  std::vector<Attribute> out;
  for (const auto& a : all) {
    if (rng() % 2) out.push_back(a);
  }
  if (out.empty()) out.push_back(all[rng() % all.size()]);
  return out;
}

inline AccessMessage RandomMessage(std::mt19937_64& rng) {
  return {"res-" + std::to_string(rng() % 1000), "d2", "d1",
          crypto::RandomHex128(),
          UnixSeconds(std::chrono::seconds(1'700'000'000 + rng() % 1000000))};
}

// Oracle: every wanted leaf is held with an equal value.
inline bool ContainsAll(const std::vector<Attribute>& held,
                        const std::vector<Attribute>& wanted) {
  for (const auto& w : wanted) {
    if (std::find(held.begin(), held.end(), w) == held.end()) return false;
  }
  return true;
}

}  // namespace dpip::testing_support
