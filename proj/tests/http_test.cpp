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

#include "dpip/http.hpp"
#include "dpip/json_io.hpp"

#include <gtest/gtest.h>

#include "scenarios.hpp"
#include "test_util.hpp"

namespace dpip {
namespace {

using testing::AliceAttributes;
using testing::Federation;
using testing::kAdminToken;
using testing::kRecordContent;
using testing::kRecordId;
using testing::kRequesterId;
using testing::ToBytes;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override { fed_.SeedAlice(); }

  httplib::Result PostJson(const std::string& path, const Json& body,
                           const std::string& token = "") {
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    return client_.Post(path, headers, body.dump(), "application/json");
  }

  Federation fed_{Federation::Wire::kHttp};
  httplib::Client client_{fed_.verifier().base_url()};
};

TEST_F(HttpTest, AliceOverLoopback) {
  for (CacheMode mode : {CacheMode::kFresh, CacheMode::kCached}) {
    auto out = fed_.Get(kRecordId, "alice", mode);
    EXPECT_TRUE(out.decision.permitted()) << out.decision.reason();
    EXPECT_EQ(out.content, ToBytes(kRecordContent));
    // Server-Timing carried the verifier's share.
    ASSERT_TRUE(out.timings.verify_s.has_value());
    EXPECT_GT(*out.timings.verify_s, 0.0);
    EXPECT_LT(*out.timings.verify_s, *out.timings.complete_s);
    EXPECT_GE(*out.timings.transfer_s, 0.0);
  }
}

TEST_F(HttpTest, DenialsSurviveTheWire) {
  auto changed = AliceAttributes();
  changed[2].value = "Royal Melbourne";
  fed_.AddUser("mallory", changed);
  EXPECT_EQ(fed_.Get(kRecordId, "mallory").decision,
            Decision::Deny(DenyReason::kBadSignature));
  EXPECT_EQ(fed_.Get("ghost", "alice").decision,
            Decision::Deny(DenyReason::kUnknownResource));
}

TEST_F(HttpTest, ListingAndKeys) {
  auto names = fed_.requester().requester().ListRemote(testing::kVerifierId);
  ASSERT_EQ(names.size(), 1u);
  EXPECT_EQ(names[0].resource_id, kRecordId);
  HttpPeerTransport t(fed_.verifier().base_url());
  EXPECT_EQ(t.FetchTpk(), fed_.tpk());
  EXPECT_EQ(t.FetchApk(), fed_.verifier().apk());
}

TEST_F(HttpTest, StatusCodes) {
  auto r = PostJson("/v1/access/initiate",
                    {{"resource_id", "ghost"}, {"requester_domain", kRequesterId}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  r = PostJson("/v1/access/initiate",
               {{"resource_id", kRecordId}, {"requester_domain", "d9"}});
  EXPECT_EQ(r->status, 409);
  r = client_.Post("/v1/access/initiate", "{not json", "application/json");
  EXPECT_EQ(r->status, 400);
  r = PostJson("/v1/access/initiate", {{"resource_id", kRecordId}});
  EXPECT_EQ(r->status, 400);
  r = PostJson("/v1/access/complete",
               {{"challenge_id", "nope"}, {"signature_b64", "AAAA"}});
  EXPECT_EQ(r->status, 410);
  EXPECT_EQ(Json::parse(r->body)["reason"], "expired-challenge");
  r = PostJson("/v1/access/initiate", {{"resource_id", kRecordId},
                                       {"requester_domain", kRequesterId}});
  std::string id = Json::parse(r->body)["challenge_id"];
  r = PostJson("/v1/access/complete",
               {{"challenge_id", id}, {"signature_b64", "AAAA"}});
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body)["decision"], "deny");
  EXPECT_EQ(Json::parse(r->body)["reason"], "bad-signature");
  EXPECT_FALSE(r->get_header_value("Server-Timing").empty());
}

TEST_F(HttpTest, ExpiredChallengeIs410) {
  auto r = PostJson("/v1/access/initiate", {{"resource_id", kRecordId},
                                            {"requester_domain", kRequesterId}});
  ASSERT_EQ(r->status, 200);
  std::string id = Json::parse(r->body)["challenge_id"];
  fed_.clock().Advance(std::chrono::seconds(61));
  r = PostJson("/v1/access/complete",
               {{"challenge_id", id}, {"signature_b64", "AAAA"}});
  EXPECT_EQ(r->status, 410);
  Json body = Json::parse(r->body);
  EXPECT_EQ(body["decision"], "deny");
  EXPECT_EQ(body["reason"], "expired-challenge");
}

TEST_F(HttpTest, AdminEndpointsNeedTheToken) {
  Json user = {{"user_id", "eve"},
               {"attributes", ToJson(std::vector<Attribute>(AliceAttributes()))}};
  auto [status, body] = AdminPost(fed_.verifier().base_url(), "wrong", "users",
                                  user.dump());
  EXPECT_EQ(status, 403);
  EXPECT_FALSE(fed_.verifier().pip().HasUser("eve"));
  std::tie(status, body) =
      AdminPost(fed_.verifier().base_url(), kAdminToken, "users", user.dump());
  EXPECT_EQ(status, 200);
  EXPECT_TRUE(fed_.verifier().pip().HasUser("eve"));

  Json policy = {{"resource_id", "ghost"}, {"entries", Json::array()}};
  std::tie(status, body) = AdminPost(fed_.verifier().base_url(), kAdminToken,
                                     "policies", policy.dump());
  EXPECT_EQ(status, 404);
  Json resource = {{"resource_id", "doc"},
                   {"display_name", "Doc"},
                   {"content_b64", crypto::ToBase64(ToBytes("hello"))}};
  std::tie(status, body) = AdminPost(fed_.verifier().base_url(), kAdminToken,
                                     "resources", resource.dump());
  EXPECT_EQ(status, 200);
  EXPECT_EQ(fed_.verifier().pap().GetResource("doc")->content,
            ToBytes("hello"));
  resource["content_b64"] = "%%%";
  std::tie(status, body) = AdminPost(fed_.verifier().base_url(), kAdminToken,
                                     "resources", resource.dump());
  EXPECT_EQ(status, 400);
}

TEST_F(HttpTest, InitiateNeverLeaksPolicyValues) {
  auto r = scenarios::InitiateLeakageScan(fed_, 30, 99);
  EXPECT_EQ(r.responses, 32);
  EXPECT_EQ(r.leaks, 0) << r.first_leak;
}

TEST_F(HttpTest, TransportErrorsAreReported) {
  HttpPeerTransport dead("http://127.0.0.1:1");
  try {
    dead.ListResources();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
  }
}

TEST(HttpRegistryTest, PeerFromAnotherFederationIsRefused) {
  testing::TempDir dir;
  auto tpk_a = abs::TsSetup("fed-a");
  auto tpk_b = abs::TsSetup("fed-b");
  Domain a(testing::MakeConfig("a", dir / "a"), tpk_a, {});
  Domain b(testing::MakeConfig("b", dir / "b"), tpk_b, {});
  b.Start();
  try {
    a.peers().Register("b", b.base_url());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTpkMismatch);
  }
  EXPECT_FALSE(a.peers().Contains("b"));
}

TEST(HttpRegistryTest, RegisterPinsThePeerApk) {
  testing::TempDir dir;
  auto tpk = abs::TsSetup("fed");
  Domain a(testing::MakeConfig("a", dir / "a"), tpk, {});
  Domain b(testing::MakeConfig("b", dir / "b"), tpk, {});
  b.Start();
  PeerEntry e = a.peers().Register("b", b.base_url());
  ASSERT_TRUE(e.apk.has_value());
  EXPECT_EQ(*e.apk, b.apk());
  EXPECT_EQ(a.peers().RequireApk("b"), b.apk());
  // A peer claiming another domain id is refused.
  EXPECT_THROW(a.peers().Register("c", b.base_url()), Error);
}

}  // namespace
}  // namespace dpip
