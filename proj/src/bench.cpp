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

#include "dpip/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dpip/domain.hpp"

namespace dpip::bench {

namespace fs = std::filesystem;

namespace {

using Steady = std::chrono::steady_clock;

constexpr const char* kVerifier = "bench-d1";
constexpr const char* kRequester = "bench-d2";

double SecondsSince(Steady::time_point start) {
  return std::chrono::duration<double>(Steady::now() - start).count();
}

std::string ResourceId(int i) { return "bench-resource-" + std::to_string(i); }
std::string UserId(int i) { return "bench-user-" + std::to_string(i); }

// n attributes, mostly Subject with the last one in Environment, values drawn
// from the seeded generator.
std::vector<Attribute> GenerateAttributes(int n, std::mt19937_64& rng) {
  std::vector<Attribute> out;
  for (int k = 0; k < n; ++k) {
    Category c = k + 1 == n && n > 1 ? Category::kEnvironment
                                     : Category::kSubject;
    std::ostringstream value;
    value << "v" << std::hex << std::setw(12) << std::setfill('0')
          << (rng() & 0xffffffffffffULL);
    out.push_back(
        Attribute::Make(c, "attr_" + std::to_string(k), value.str()));
  }
  return out;
}

std::unique_ptr<Domain> MakeDomain(const std::string& id, const fs::path& dir,
                                   const abs::TrusteePublicKey& tpk,
                                   const std::string& token) {
  DomainConfig cfg;
  cfg.domain_id = id;
  cfg.port = 0;
  cfg.data_dir = dir;
  cfg.admin_token = token;
  return std::make_unique<Domain>(std::move(cfg), tpk, Domain::Options{});
}

double Opt(const std::optional<double>& v) { return v.value_or(0.0); }

BenchRow RowFromTimings(int user, int n, Mode mode, int rep,
                        const PhaseTimings& t) {
  BenchRow row;
  row.user_index = user;
  row.n_attributes = n;
  row.mode = mode;
  row.rep = rep;
  row.asetup_s = Opt(t.asetup_s);
  row.attrgen_s = Opt(t.attrgen_s);
  row.sign_s = Opt(t.sign_s);
  row.verify_s = Opt(t.verify_s);
  row.transfer_s = Opt(t.transfer_s);
  row.total_s = t.total_s;
  return row;
}

struct ReplayState {
  AccessMessage message;
};

// One access with cached keys and a signature reused across repetitions,
// verified locally against the verifier's policy claim.
BenchRow ReplayAccess(Domain& requester, Domain& verifier, int user, int n,
                      int rep, const ReplayState& state) {
  const auto total_start = Steady::now();
  PhaseTimings t;
  auto policy = verifier.pap().GetPolicy(ResourceId(user));
  RequiredPredicate required = PolicyToRequiredPredicate(*policy);

  auto start = Steady::now();
  auto attrs = requester.pip().Query(UserId(user), required.leaves());
  ClaimPredicate claim = BuildClaimPredicate(required, attrs);
  t.pip_s = SecondsSince(start);

  KeyCache& cache = requester.cache(CacheMode::kCached);
  KeyLookup keys = cache.GetOrCreate(claim.leaves(), claim);
  t.asetup_s = keys.timings.asetup_s;
  t.attrgen_s = keys.timings.attrgen_s;

  start = Steady::now();
  auto [sig, reused] = cache.SignCached(*keys.bundle, claim, state.message);
  Bytes encoded = abs::Encode(sig);
  if (!reused) t.sign_s = SecondsSince(start);

  start = Steady::now();
  bool ok = abs::Verify(verifier.tpk(), requester.apk(), state.message,
                        PolicyToClaimPredicate(*policy), encoded);
  t.verify_s = SecondsSince(start);
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "replayed signature failed to verify for " + UserId(user));
  }
  t.total_s = SecondsSince(total_start);
  return RowFromTimings(user, n, Mode::kCachedSignature, rep, t);
}

std::string Fixed(double v, int precision = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kFresh: return "fresh";
    case Mode::kCached: return "cached";
    case Mode::kCachedSignature: return "cached-sig";
  }
  return "unknown";
}

std::optional<Mode> ParseMode(std::string_view text) {
  for (Mode m : {Mode::kFresh, Mode::kCached, Mode::kCachedSignature}) {
    if (ModeName(m) == text) return m;
  }
  return std::nullopt;
}

void BenchConfig::Validate() const {
  if (user_attr_counts.empty()) {
    throw Error(ErrorCode::kConfig, "user_attr_counts must not be empty");
  }
  for (std::size_t i = 0; i < user_attr_counts.size(); ++i) {
    if (user_attr_counts[i] <= 0 ||
        (i > 0 && user_attr_counts[i] <= user_attr_counts[i - 1])) {
      throw Error(ErrorCode::kConfig,
                  "user_attr_counts must be positive and strictly increasing");
    }
  }
  if (warmup < 0 || repetitions <= warmup) {
    throw Error(ErrorCode::kConfig, "repetitions must exceed warmup");
  }
  if (modes.empty()) throw Error(ErrorCode::kConfig, "no modes selected");
}

BenchConfig LoadBenchConfig(const fs::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  BenchConfig cfg;
  try {
    pt::read_ini(path.string(), tree);
    const auto& b = tree.get_child("bench");
    if (auto counts = b.get_optional<std::string>("counts")) {
      std::vector<std::string> parts;
      boost::split(parts, *counts, boost::is_any_of(", "),
                   boost::token_compress_on);
      cfg.user_attr_counts.clear();
      for (const auto& p : parts) {
        if (!p.empty()) cfg.user_attr_counts.push_back(std::stoi(p));
      }
    }
    cfg.repetitions = b.get<int>("repetitions", cfg.repetitions);
    cfg.warmup = b.get<int>("warmup", cfg.warmup);
    cfg.seed = b.get<std::uint64_t>("seed", cfg.seed);
    if (auto modes = b.get_optional<std::string>("modes")) {
      std::vector<std::string> parts;
      boost::split(parts, *modes, boost::is_any_of(", "),
                   boost::token_compress_on);
      cfg.modes.clear();
      for (const auto& p : parts) {
        if (p.empty()) continue;
        auto m = ParseMode(p);
        if (!m) throw Error(ErrorCode::kConfig, "unknown bench mode " + p);
        cfg.modes.push_back(*m);
      }
    }
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::kConfig,
                "bench config " + path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kConfig,
                "bench config " + path.string() + ": " + e.what());
  }
  cfg.Validate();
  return cfg;
}

BenchResult RunBenchmark(const BenchConfig& config, const fs::path& work_dir) {
  config.Validate();
  std::error_code ec;
  fs::remove_all(work_dir, ec);
  fs::create_directories(work_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot prepare " + work_dir.string());

  const std::string token = crypto::RandomHex128();
  const auto tpk = abs::TsSetup("bench-federation");
  auto verifier = MakeDomain(kVerifier, work_dir / "d1", tpk, token);
  auto requester = MakeDomain(kRequester, work_dir / "d2", tpk, token);
  verifier->Start();
  requester->Start();
  verifier->peers().Configure({kRequester, requester->base_url(), {}, {}});
  requester->peers().Configure({kVerifier, verifier->base_url(), {}, {}});
  verifier->peers().Register(kRequester, requester->base_url());

  std::mt19937_64 rng(config.seed);
  std::vector<ReplayState> replay;
  for (std::size_t i = 0; i < config.user_attr_counts.size(); ++i) {
    int user = static_cast<int>(i);
    auto attrs = GenerateAttributes(config.user_attr_counts[i], rng);
    std::string content = "resource payload " + std::to_string(user);
    verifier->pap().PutResource(
        token, {ResourceId(user), "Bench resource " + std::to_string(user),
                Bytes(content.begin(), content.end()), false});
    verifier->pap().PutPolicy(token, Policy::Make(ResourceId(user), attrs));
    requester->pip().PutUser(token, UserRecord::Make(UserId(user), attrs));
    replay.push_back({{ResourceId(user), kRequester, kVerifier,
                       crypto::RandomHex128(), SystemNow()}});
  }

  BenchResult result;
  // Modes interleave within each repetition so slow drift hits all alike.
  for (int rep = 0; rep < config.repetitions; ++rep) {
    for (std::size_t i = 0; i < config.user_attr_counts.size(); ++i) {
      int user = static_cast<int>(i);
      int n = config.user_attr_counts[i];
      for (Mode mode : config.modes) {
        if (mode == Mode::kCachedSignature) {
          result.rows.push_back(
              ReplayAccess(*requester, *verifier, user, n, rep, replay[i]));
          continue;
        }
        CacheMode cache_mode =
            mode == Mode::kFresh ? CacheMode::kFresh : CacheMode::kCached;
        AccessOutcome outcome = requester->requester().RequestRemoteResource(
            kVerifier, ResourceId(user), UserId(user), cache_mode);
        if (!outcome.decision.permitted()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "benchmark access denied (" +
                          std::string(outcome.decision.reason()) +
                          ") for user " + std::to_string(user) + " mode " +
                          std::string(ModeName(mode)) + " rep " +
                          std::to_string(rep));
        }
        result.rows.push_back(
            RowFromTimings(user, n, mode, rep, outcome.timings));
      }
    }
  }
  requester->Stop();
  verifier->Stop();
  result.summary = Summarize(result.rows, config.warmup);
  return result;
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2;
}

double Slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return 0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den == 0 ? 0 : num / den;
}

bool TrendVerdicts::all_pass() const {
  for (const auto& [m, ok] : verify_monotone) {
    if (!ok) return false;
  }
  for (const auto& [m, s] : verify_slope) {
    if (!(s > 0)) return false;
  }
  for (const auto& [n, ok] : cached_faster) {
    if (!ok) return false;
  }
  return true;
}

BenchSummary Summarize(const std::vector<BenchRow>& rows, int warmup) {
  struct Samples {
    std::vector<double> asetup, attrgen, sign, verify, transfer, total;
  };
  std::map<std::pair<int, Mode>, Samples> samples;
  for (const auto& r : rows) {
    if (r.rep < warmup) continue;
    auto& s = samples[{r.n_attributes, r.mode}];
    s.asetup.push_back(r.asetup_s);
    s.attrgen.push_back(r.attrgen_s);
    s.sign.push_back(r.sign_s);
    s.verify.push_back(r.verify_s);
    s.transfer.push_back(r.transfer_s);
    s.total.push_back(r.total_s);
  }

  BenchSummary out;
  out.rows = rows.size();
  std::map<Mode, std::vector<std::pair<double, double>>> verify_by_mode;
  for (auto& [key, s] : samples) {
    Medians m{Median(s.asetup), Median(s.attrgen),  Median(s.sign),
              Median(s.verify), Median(s.transfer), Median(s.total)};
    out.medians[key] = m;
    verify_by_mode[key.second].push_back(
        {static_cast<double>(key.first), m.verify_s});
  }

  for (auto& [mode, points] : verify_by_mode) {
    std::sort(points.begin(), points.end());
    bool monotone = true;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && points[i].second + kTimerResolution < points[i - 1].second) {
        monotone = false;
      }
      xs.push_back(points[i].first);
      ys.push_back(points[i].second);
    }
    out.verdicts.verify_monotone[mode] = monotone;
    out.verdicts.verify_slope[mode] = Slope(xs, ys);
  }

  for (const auto& [key, m] : out.medians) {
    if (key.second != Mode::kFresh) continue;
    auto cached = out.medians.find({key.first, Mode::kCached});
    if (cached == out.medians.end()) continue;
    out.verdicts.cached_faster[key.first] = cached->second.total_s < m.total_s;
    out.verdicts.fresh_over_cached[key.first] =
        cached->second.total_s > 0 ? m.total_s / cached->second.total_s : 0;
  }
  return out;
}

std::string CsvHeader() {
  return "user_index,n_attributes,mode,rep,asetup_s,attrgen_s,sign_s,"
         "verify_s,transfer_s,total_s";
}

std::string SummaryMarkdown(const BenchSummary& summary) {
  std::ostringstream md;
  md << "# Benchmark summary\n\n";
  md << "Medians over post-warmup repetitions, in seconds. " << summary.rows
     << " rows recorded.\n\n";
  md << "| n | mode | asetup | attrgen | sign | verify | transfer | total |\n";
  md << "|---|------|--------|---------|------|--------|----------|-------|\n";
  for (const auto& [key, m] : summary.medians) {
    md << "| " << key.first << " | " << ModeName(key.second) << " | "
       << Fixed(m.asetup_s) << " | " << Fixed(m.attrgen_s) << " | "
       << Fixed(m.sign_s) << " | " << Fixed(m.verify_s) << " | "
       << Fixed(m.transfer_s) << " | " << Fixed(m.total_s) << " |\n";
  }

  const auto& v = summary.verdicts;
  md << "\n## Trend checks\n\n";
  for (const auto& [mode, ok] : v.verify_monotone) {
    md << "- verify time non-decreasing in n (" << ModeName(mode)
       << "): " << (ok ? "PASS" : "FAIL") << "\n";
  }
  for (const auto& [mode, slope] : v.verify_slope) {
    md << "- verify time slope (" << ModeName(mode) << "): "
       << Fixed(slope * 1e6, 3) << " us per attribute: "
       << (slope > 0 ? "PASS" : "FAIL") << "\n";
  }
  if (!v.cached_faster.empty()) {
    md << "\n| n | fresh total / cached total | cached faster |\n";
    md << "|---|----------------------------|---------------|\n";
    for (const auto& [n, ok] : v.cached_faster) {
      md << "| " << n << " | " << Fixed(v.fresh_over_cached.at(n), 3)
         << " | " << (ok ? "PASS" : "FAIL") << " |\n";
    }
  }
  md << "\nOverall: " << (v.all_pass() ? "PASS" : "FAIL") << "\n";
  return md.str();
}

Json SummaryToJson(const BenchSummary& summary) {
  Json medians = Json::array();
  for (const auto& [key, m] : summary.medians) {
    medians.push_back({{"n_attributes", key.first},
                       {"mode", ModeName(key.second)},
                       {"asetup_s", m.asetup_s},
                       {"attrgen_s", m.attrgen_s},
                       {"sign_s", m.sign_s},
                       {"verify_s", m.verify_s},
                       {"transfer_s", m.transfer_s},
                       {"total_s", m.total_s}});
  }
  Json verdicts = Json::object();
  for (const auto& [mode, ok] : summary.verdicts.verify_monotone) {
    verdicts["verify_monotone"][std::string(ModeName(mode))] = ok;
  }
  for (const auto& [mode, s] : summary.verdicts.verify_slope) {
    verdicts["verify_slope"][std::string(ModeName(mode))] = s;
  }
  for (const auto& [n, ok] : summary.verdicts.cached_faster) {
    verdicts["cached_faster"][std::to_string(n)] = ok;
    verdicts["fresh_over_cached"][std::to_string(n)] =
        summary.verdicts.fresh_over_cached.at(n);
  }
  return {{"rows", summary.rows},
          {"medians", medians},
          {"verdicts", verdicts},
          {"pass", summary.verdicts.all_pass()}};
}

void EmitReport(const BenchResult& result, const fs::path& out_dir) {
  if (result.rows.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no benchmark rows to report");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());

  std::ostringstream csv;
  csv << CsvHeader() << "\n";
  for (const auto& r : result.rows) {
    csv << r.user_index << ',' << r.n_attributes << ',' << ModeName(r.mode)
        << ',' << r.rep << ',' << Fixed(r.asetup_s, 9) << ','
        << Fixed(r.attrgen_s, 9) << ',' << Fixed(r.sign_s, 9) << ','
        << Fixed(r.verify_s, 9) << ',' << Fixed(r.transfer_s, 9) << ','
        << Fixed(r.total_s, 9) << "\n";
  }
  WriteFile(out_dir / "bench.csv", csv.str());

  const auto& medians = result.summary.medians;
  std::set<Mode> modes;
  for (const auto& [key, m] : medians) modes.insert(key.second);

  std::ostringstream fig4;
  fig4 << "# median verify seconds vs number of attributes\n";
  bool first = true;
  for (Mode mode : modes) {
    if (!first) fig4 << "\n\n";
    first = false;
    fig4 << "# mode " << ModeName(mode) << "\n";
    for (const auto& [key, m] : medians) {
      if (key.second == mode) {
        fig4 << key.first << ' ' << Fixed(m.verify_s, 9) << "\n";
      }
    }
  }
  WriteFile(out_dir / "fig4.dat", fig4.str());

  auto totals = [&](Mode mode, const char* title) {
    std::ostringstream os;
    os << "# " << title << ": median total seconds vs number of attributes\n";
    for (const auto& [key, m] : medians) {
      if (key.second == mode) {
        os << key.first << ' ' << Fixed(m.total_s, 9) << "\n";
      }
    }
    return os.str();
  };
  WriteFile(out_dir / "fig5.dat", totals(Mode::kFresh, "fresh keys"));
  WriteFile(out_dir / "fig6.dat", totals(Mode::kCached, "stored keys"));
  WriteFile(out_dir / "summary.md", SummaryMarkdown(result.summary));
}

}  // namespace dpip::bench
