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

// Drives the dpip binary end to end: two daemons, admin calls, client calls.

#include <gtest/gtest.h>

#include <memory>

#include "proc_util.hpp"

namespace {

using dpip::proc::AliceJson;
using dpip::proc::CountLines;
using dpip::proc::Daemon;
using dpip::proc::Json;
using dpip::proc::kRecordBytes;
using dpip::proc::RunResult;
using dpip::proc::ScratchDir;
using dpip::proc::Spit;

const std::string kCli = DPIP_CLI_PATH;

class CliTest : public ::testing::Test {
 protected:
  RunResult Cli(std::vector<std::string> args) {
    args.insert(args.begin(), kCli);
    return dpip::proc::Run(args, dir_.path());
  }

  ScratchDir dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli({}).exit_code, 2);
  EXPECT_EQ(Cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(Cli({"client", "get", "d1", "rec"}).exit_code, 2);
  EXPECT_EQ(Cli({"--help"}).exit_code, 0);
  auto r = Cli({"--json", "serve", "--config", (dir_ / "missing.ini").string()});
  EXPECT_EQ(r.exit_code, 2);
  Json err = Json::parse(r.err);
  EXPECT_EQ(err["exit_code"], 2);
  EXPECT_FALSE(err["error"].get<std::string>().empty());
}

TEST_F(CliTest, TrusteeInitWritesTheTpk) {
  auto r = Cli({"trustee-init", (dir_ / "fed.tpk").string(), "--federation-id",
                "demo"});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_FALSE(dpip::proc::Slurp(dir_ / "fed.tpk").empty());
  EXPECT_EQ(Cli({"trustee-init", (dir_ / "no" / "x.tpk").string()}).exit_code, 2);
}

TEST_F(CliTest, BenchRunWritesFiles) {
  Spit(dir_ / "b.ini", "[bench]\ncounts = 1,2\nrepetitions = 2\nwarmup = 1\n");
  auto r = Cli({"--json", "bench", "run", "--config", (dir_ / "b.ini").string(),
                "--out", (dir_ / "out").string()});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "summary.md"));
  EXPECT_EQ(Json::parse(r.out)["rows"], 8);
}

class CliFederationTest : public CliTest {
 protected:
  void SetUp() override {
    layout_ = dpip::proc::WriteTwoDomains(dir_.path());
    ASSERT_EQ(Cli({"trustee-init", layout_.tpk.string()}).exit_code, 0);
    d1_ = std::make_unique<Daemon>(
        std::vector<std::string>{kCli, "serve", "--config", layout_.d1_ini},
        dir_ / "d1.log");
    d2_ = std::make_unique<Daemon>(
        std::vector<std::string>{kCli, "serve", "--config", layout_.d2_ini},
        dir_ / "d2.log");
    ASSERT_TRUE(d1_->WaitForPort(layout_.d1_port)) << d1_->Log();
    ASSERT_TRUE(d2_->WaitForPort(layout_.d2_port)) << d2_->Log();

    Spit(dir_ / "content.bin", kRecordBytes);
    AdminOk("add-resource", "d1",
            {{"resource_id", "rec"}, {"display_name", "Record"}},
            {"--content-file", (dir_ / "content.bin").string()});
    AdminOk("add-policy", "d1", {{"resource_id", "rec"}, {"entries", AliceJson()}});
    AddUser("alice", AliceJson());
  }

  void AdminOk(const std::string& cmd, const std::string& domain,
               const Json& body, std::vector<std::string> extra = {}) {
    auto r = Admin(cmd, domain, body, std::move(extra));
    ASSERT_EQ(r.exit_code, 0) << cmd << ": " << r.err;
  }

  RunResult Admin(const std::string& cmd, const std::string& domain,
                  const Json& body, std::vector<std::string> extra = {}) {
    auto file = dir_ / ("body-" + std::to_string(++bodies_) + ".json");
    Spit(file, body.dump());
    std::vector<std::string> args = {
        "admin", cmd, file.string(), "--config",
        (domain == "d1" ? layout_.d1_ini : layout_.d2_ini).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return Cli(args);
  }

  void AddUser(const std::string& user, const Json& attrs) {
    AdminOk("add-user", "d2", {{"user_id", user}, {"attributes", attrs}});
  }

  RunResult Get(const std::string& user, const std::string& resource = "rec",
                const std::string& mode = "cached") {
    return Cli({"--json", "client", "get", "d1", resource, "--user", user,
                "--mode", mode, "--config", layout_.d2_ini.string()});
  }

  dpip::proc::TwoDomains layout_;
  std::unique_ptr<Daemon> d1_, d2_;
  int bodies_ = 0;
};

TEST_F(CliFederationTest, AliceGetsTheExactBytes) {
  for (const char* mode : {"fresh", "cached"}) {
    auto r = Get("alice", "rec", mode);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(r.out, kRecordBytes);
    Json result = Json::parse(r.err);
    EXPECT_EQ(result["decision"], "permit");
    EXPECT_EQ(result["mode"], mode);
  }
  auto out = dir_ / "saved.bin";
  auto r = Cli({"client", "get", "d1", "rec", "--user", "alice", "--out",
                out.string(), "--config", layout_.d2_ini.string()});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(dpip::proc::Slurp(out), kRecordBytes);
}

TEST_F(CliFederationTest, ListShowsNamesOnly) {
  auto r = Cli({"--json", "client", "ls", "d1", "--config",
                layout_.d2_ini.string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json names = Json::parse(r.out);
  ASSERT_EQ(names.size(), 1u);
  EXPECT_EQ(names[0]["resource_id"], "rec");
  EXPECT_EQ(r.out.find("cardiologist"), std::string::npos);
}

TEST_F(CliFederationTest, DeniesExitOne) {
  Json bob = AliceJson();
  bob[0]["value"] = "Alicia";
  AddUser("bob", bob);
  auto r = Get("bob");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(Json::parse(r.err)["reason"], "bad-signature");

  Json carol = AliceJson();
  carol.erase(carol.begin());
  AddUser("carol", carol);
  int completes_before = CountLines(d1_->Log(), " complete ");
  r = Get("carol");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(Json::parse(r.err)["reason"], "missing-attribute");
  EXPECT_EQ(CountLines(d1_->Log(), " complete "), completes_before);

  r = Get("alice", "ghost");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(Json::parse(r.err)["reason"], "unknown-resource");
}

TEST_F(CliFederationTest, OtherFailuresExitTwoOrThree) {
  auto r = Admin("add-user", "d2", {{"user_id", "x"}, {"attributes", AliceJson()}},
                 {"--token", "wrong"});
  EXPECT_EQ(r.exit_code, 2);
  r = Cli({"client", "get", "d9", "rec", "--user", "alice", "--config",
           layout_.d2_ini.string()});
  EXPECT_EQ(r.exit_code, 2);
  r = Admin("add-policy", "d1", {{"resource_id", "rec"}, {"entries", "nope"}});
  EXPECT_EQ(r.exit_code, 2);

  EXPECT_EQ(d1_->Stop(), 0) << "serve should exit cleanly on SIGTERM";
  r = Get("alice");
  EXPECT_EQ(r.exit_code, 3) << r.err;
}

}  // namespace
