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

// Key-generation vs key-storage timing harness. Two domains run in one
// process and talk over loopback HTTP; user i holds exactly the attributes
// of resource i's policy, and every (repetition, user, mode) triple runs one
// full remote access.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpip/json_io.hpp"

namespace dpip::bench {

enum class Mode {
  kFresh,
  kCached,
  // Cached keys and a reused signature over a fixed message. Verified
  // in-process, since the wire protocol never repeats a message.
  kCachedSignature,
};

std::string_view ModeName(Mode mode);
std::optional<Mode> ParseMode(std::string_view text);

struct BenchConfig {
  std::vector<int> user_attr_counts = {2, 4, 6, 8, 10};
  int repetitions = 20;
  std::vector<Mode> modes = {Mode::kFresh, Mode::kCached};
  int warmup = 3;
  std::uint64_t seed = 1;

  // Throws Error(kConfig) when counts are not strictly increasing and
  // positive, repetitions <= warmup, or modes is empty.
  void Validate() const;
};

// INI file with a [bench] section; see docs/benchmark.md.
BenchConfig LoadBenchConfig(const std::filesystem::path& path);

struct BenchRow {
  int user_index = 0;
  int n_attributes = 0;
  Mode mode = Mode::kFresh;
  int rep = 0;
  // Absent phases are recorded as zero.
  double asetup_s = 0;
  double attrgen_s = 0;
  double sign_s = 0;
  double verify_s = 0;
  double transfer_s = 0;
  double total_s = 0;
};

struct Medians {
  double asetup_s = 0;
  double attrgen_s = 0;
  double sign_s = 0;
  double verify_s = 0;
  double transfer_s = 0;
  double total_s = 0;
};

struct TrendVerdicts {
  // Per mode: median verify is non-decreasing in n (ties within
  // kTimerResolution allowed), and its least-squares slope is positive.
  std::map<Mode, bool> verify_monotone;
  std::map<Mode, double> verify_slope;
  // Per n: median Cached total < median Fresh total, and Fresh/Cached ratio.
  std::map<int, bool> cached_faster;
  std::map<int, double> fresh_over_cached;

  bool all_pass() const;
};

inline constexpr double kTimerResolution = 1e-6;

struct BenchSummary {
  std::map<std::pair<int, Mode>, Medians> medians;  // keyed by (n, mode)
  TrendVerdicts verdicts;
  std::size_t rows = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  BenchSummary summary;
};

// Runs under `work_dir` (emptied first). Aborts with Error on any Deny.
BenchResult RunBenchmark(const BenchConfig& config,
                         const std::filesystem::path& work_dir);

// Medians over post-warmup repetitions, and the trend checks.
BenchSummary Summarize(const std::vector<BenchRow>& rows, int warmup);

double Median(std::vector<double> values);
// Least-squares slope of y on x.
double Slope(const std::vector<double>& x, const std::vector<double>& y);

// Writes bench.csv, fig4.dat, fig5.dat, fig6.dat and summary.md.
// Throws Error(kInvalidArgument) on empty rows, Error(kIo) on I/O failure.
void EmitReport(const BenchResult& result,
                const std::filesystem::path& out_dir);

std::string CsvHeader();
std::string SummaryMarkdown(const BenchSummary& summary);
Json SummaryToJson(const BenchSummary& summary);

}  // namespace dpip::bench
