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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dpip/json_io.hpp"
#include "dpip/model.hpp"

namespace dpip {
namespace {

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

Attribute A(std::string name, std::string value,
            Category c = Category::kSubject) {
  return Attribute::Make(c, std::move(name), std::move(value));
}

// Plaintext oracle: every policy entry appears in attrs with an equal value.
bool OracleSatisfies(const std::vector<Attribute>& attrs,
                     const std::vector<Attribute>& policy) {
  for (const auto& p : policy) {
    bool found = false;
    for (const auto& a : attrs) {
      if (a.category == p.category && a.name == p.name && a.value == p.value) {
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

TEST(CategoryTest, NamesRoundTrip) {
  for (Category c : {Category::kSubject, Category::kAction,
                     Category::kResource, Category::kEnvironment}) {
    EXPECT_EQ(ParseCategory(CategoryName(c)), c);
  }
  EXPECT_FALSE(ParseCategory("subject").has_value());
  EXPECT_FALSE(ParseCategory("").has_value());
}

TEST(AttributeTest, RejectsBadNamesAndValues) {
  EXPECT_EQ(CodeOf([] { A("", "x"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { A("has space", "x"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { A("colon:name", "x"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { A("n", ""); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { A("n", "line\nbreak"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { A("n", std::string("a\x1f" "b")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(A("first_name.v-2", "Box Hill, VIC: 3128 = ok"));
}

TEST(PolicyTest, RejectsDuplicateNames) {
  EXPECT_EQ(CodeOf([] {
              Policy::Make("r", {A("position", "a"), A("position", "b")});
            }),
            ErrorCode::kDuplicateAttribute);
  // Same name in two categories is two different attributes.
  EXPECT_NO_THROW(Policy::Make(
      "r", {A("x", "1"), A("x", "1", Category::kEnvironment)}));
  EXPECT_TRUE(Policy::Make("r", {}).unprotected());
}

TEST(PredicateTest, LeavesAreSortedAndUnique) {
  auto required = RequiredPredicate::FromLeaves(
      {{Category::kEnvironment, "city"}, {Category::kSubject, "b"},
       {Category::kSubject, "a"}});
  ASSERT_EQ(required.size(), 3u);
  EXPECT_TRUE(std::is_sorted(required.leaves().begin(), required.leaves().end()));
  EXPECT_EQ(CodeOf([] {
              RequiredPredicate::FromLeaves(
                  {{Category::kSubject, "a"}, {Category::kSubject, "a"}});
            }),
            ErrorCode::kDuplicateAttribute);
  EXPECT_EQ(CodeOf([] { ClaimPredicate::FromLeaves({A("a", "1"), A("a", "2")}); }),
            ErrorCode::kDuplicateAttribute);
}

TEST(PredicateTest, PolicyProjectionsAgree) {
  Policy p = Policy::Make("r", {A("z", "1"), A("a", "2"),
                                A("m", "3", Category::kAction)});
  ClaimPredicate claim = PolicyToClaimPredicate(p);
  EXPECT_EQ(claim.names(), PolicyToRequiredPredicate(p));
  EXPECT_TRUE(Satisfies(claim, p));
}

TEST(BuildClaimTest, ListsEveryMissingName) {
  auto required = RequiredPredicate::FromLeaves(
      {{Category::kSubject, "a"}, {Category::kSubject, "b"},
       {Category::kSubject, "c"}});
  std::vector<Attribute> attrs = {A("b", "2"), A("extra", "x")};
  try {
    BuildClaimPredicate(required, attrs);
    FAIL() << "expected MissingAttributeError";
  } catch (const MissingAttributeError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingAttribute);
    std::vector<AttributeName> want = {{Category::kSubject, "a"},
                                       {Category::kSubject, "c"}};
    EXPECT_EQ(e.missing(), want);
  }
}

TEST(BuildClaimTest, DropsAttributesOutsideThePredicate) {
  auto required = RequiredPredicate::FromLeaves({{Category::kSubject, "a"}});
  std::vector<Attribute> attrs = {A("a", "1"), A("secret", "s")};
  ClaimPredicate claim = BuildClaimPredicate(required, attrs);
  ASSERT_EQ(claim.size(), 1u);
  EXPECT_EQ(claim.leaves()[0], A("a", "1"));
}

TEST(EvaluatePolicyTest, MissingOutranksMismatch) {
  Policy p = Policy::Make("r", {A("a", "1"), A("b", "2")});
  std::vector<Attribute> both = {A("a", "1"), A("b", "2")};
  std::vector<Attribute> wrong = {A("a", "1"), A("b", "3")};
  std::vector<Attribute> wrong_and_missing = {A("b", "3")};
  EXPECT_TRUE(EvaluatePolicy(both, p).permitted());
  EXPECT_EQ(EvaluatePolicy(wrong, p),
            Decision::Deny(DenyReason::kValueMismatch));
  EXPECT_EQ(EvaluatePolicy(wrong_and_missing, p),
            Decision::Deny(DenyReason::kMissingAttribute));
  EXPECT_TRUE(EvaluatePolicy({}, Policy::Make("r", {})).permitted());
}

TEST(EvaluatePolicyTest, AgreesWithOracleOnRandomInstances) {
  std::mt19937 rng(7);
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  const std::vector<std::string> values = {"x", "y", "z"};
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<Attribute> policy, attrs;
    for (const auto& n : names) {
      if (rng() % 2) policy.push_back(A(n, values[rng() % 3]));
      if (rng() % 4) attrs.push_back(A(n, values[rng() % 3]));
    }
    Policy p = Policy::Make("r", policy);
    EXPECT_EQ(EvaluatePolicy(attrs, p).permitted(),
              OracleSatisfies(attrs, policy));
  }
}

TEST(DecisionTest, ReasonCodes) {
  EXPECT_EQ(Decision::Permit().reason(), "ok");
  for (DenyReason r :
       {DenyReason::kMissingAttribute, DenyReason::kValueMismatch,
        DenyReason::kBadSignature, DenyReason::kExpiredChallenge,
        DenyReason::kUnknownResource, DenyReason::kUnknownPeer}) {
    EXPECT_EQ(ParseDenyReason(DenyReasonCode(r)), r);
    EXPECT_EQ(Decision::Deny(r).reason(), DenyReasonCode(r));
  }
  EXPECT_EQ(DenyReasonCode(DenyReason::kBadSignature), "bad-signature");
  EXPECT_EQ(DenyReasonCode(DenyReason::kMissingAttribute), "missing-attribute");
}

TEST(AliasTest, InjectiveAndReversible) {
  AliasMap m;
  AttributeName remote{Category::kSubject, "job"};
  AttributeName local{Category::kSubject, "position"};
  m.Insert(remote, local);
  EXPECT_EQ(m.Apply(remote), local);
  AttributeName other{Category::kSubject, "city"};
  EXPECT_EQ(m.Apply(other), other);
  EXPECT_EQ(CodeOf([&] { m.Insert({Category::kSubject, "role"}, local); }),
            ErrorCode::kAliasCollision);

  auto required = RequiredPredicate::FromLeaves({remote, other});
  ResolvedNames r = ResolveNames(required, m);
  EXPECT_EQ(r.localized,
            RequiredPredicate::FromLeaves({local, other}));
  std::vector<Attribute> local_attrs = {A("position", "cardiologist"),
                                        A("city", "Melbourne")};
  auto renamed = ApplyAliases(local_attrs, r.reverse);
  std::set<AttributeName> keys;
  for (const auto& a : renamed) keys.insert(a.key());
  EXPECT_TRUE(keys.count(remote));
  EXPECT_TRUE(keys.count(other));
}

TEST(AliasTest, ResolvingOntoAnExistingNameCollides) {
  AliasMap m;
  m.Insert({Category::kSubject, "job"}, {Category::kSubject, "position"});
  // Both "job" (via alias) and "position" itself would map to "position".
  auto required = RequiredPredicate::FromLeaves(
      {{Category::kSubject, "job"}, {Category::kSubject, "position"}});
  EXPECT_EQ(CodeOf([&] { ResolveNames(required, m); }),
            ErrorCode::kAliasCollision);
}

TEST(TimestampTest, RoundTrip) {
  UnixSeconds t{std::chrono::seconds(1'700'000'123)};
  std::string s = FormatTimestamp(t);
  EXPECT_EQ(s, "2023-11-14T22:15:23Z");
  EXPECT_EQ(ParseTimestamp(s), t);
  EXPECT_FALSE(ParseTimestamp("2023-11-14 22:15:23").has_value());
  EXPECT_FALSE(ParseTimestamp("not a time").has_value());
}

// Equal canonical bytes iff structurally equal, over many random values from
// small alphabets (so near-collisions are common).
TEST(CanonicalTest, ClaimEncodingIsInjective) {
  std::mt19937 rng(11);
  const std::vector<std::string> names = {"a", "b", "ab", "a.b"};
  const std::vector<std::string> values = {"x", "x y", "y", "xy", "x:y", "=",
                                           "a=b"};
  const Category cats[] = {Category::kSubject, Category::kEnvironment};
  auto random_claim = [&] {
    std::map<AttributeName, Attribute> leaves;
    int n = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      Attribute a = Attribute::Make(cats[rng() % 2], names[rng() % 4],
                                    values[rng() % values.size()]);
      leaves[a.key()] = a;
    }
    std::vector<Attribute> v;
    for (auto& [k, a] : leaves) v.push_back(a);
    return ClaimPredicate::FromLeaves(v);
  };
  std::map<Bytes, ClaimPredicate> seen;
  for (int i = 0; i < 10000; ++i) {
    ClaimPredicate c = random_claim();
    Bytes b = CanonicalBytes(c);
    auto [it, inserted] = seen.emplace(b, c);
    if (!inserted) {
      ASSERT_EQ(it->second, c) << "distinct claims share canonical bytes";
    }
  }
  // Distinct structures were actually produced.
  EXPECT_GT(seen.size(), 100u);
}

TEST(CanonicalTest, MessageEncodingIsInjective) {
  std::mt19937 rng(13);
  const std::vector<std::string> parts = {"r", "r1", "d", "d1", "1d"};
  std::map<Bytes, AccessMessage> seen;
  for (int i = 0; i < 10000; ++i) {
    AccessMessage m{parts[rng() % 5], parts[rng() % 5], parts[rng() % 5],
                    std::string(32, "0123456789abcdef"[rng() % 16]),
                    UnixSeconds(std::chrono::seconds(rng() % 4))};
    auto [it, inserted] = seen.emplace(CanonicalBytes(m), m);
    if (!inserted) ASSERT_EQ(it->second, m);
  }
}

TEST(CanonicalTest, TypesNeverShareBytes) {
  ClaimPredicate claim = ClaimPredicate::FromLeaves({A("a", "b")});
  Bytes c = CanonicalBytes(claim);
  Bytes r = CanonicalBytes(claim.names());
  EXPECT_NE(c, r);
  EXPECT_EQ(c[0], 'C');
  EXPECT_EQ(r[0], 'R');
  EXPECT_EQ(c[1], kRecordSeparator);
}

TEST(JsonTest, RoundTrips) {
  Policy p = Policy::Make("r", {A("a", "1"), A("c", "2", Category::kAction)});
  EXPECT_EQ(PolicyFromJson(ToJson(p)), p);
  AccessMessage m{"r", "d2", "d1", std::string(32, 'a'),
                  UnixSeconds(std::chrono::seconds(1'700'000'000))};
  EXPECT_EQ(AccessMessageFromJson(ToJson(m)), m);
  auto req = PolicyToRequiredPredicate(p);
  EXPECT_EQ(RequiredPredicateFromJson(ToJson(req)), req);
  // Required predicates carry names only.
  EXPECT_EQ(ToJson(req).dump().find("\"1\""), std::string::npos);
  EXPECT_EQ(CodeOf([] { AttributeFromJson(Json::parse(R"({"name":"a"})")); }),
            ErrorCode::kMalformed);
}

}  // namespace
}  // namespace dpip
