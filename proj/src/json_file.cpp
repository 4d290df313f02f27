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

#include "json_file.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <map>

#include <boost/interprocess/exceptions.hpp>

namespace dpip {

namespace fs = std::filesystem;

Json ReadJsonFile(const fs::path& path, Json fallback) {
  std::ifstream in(path);
  if (!in) {
    if (!fs::exists(path)) return fallback;
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformed,
                path.string() + " is not valid JSON: " + e.what());
  }
}

void WriteJsonFileAtomic(const fs::path& path, const Json& doc) {
  fs::path tmp = path;
  static std::atomic<unsigned> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot replace " + path.string());
  }
}

namespace {

std::mutex& PathMutex(const fs::path& path) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::error_code ec;
  fs::path key = fs::weakly_canonical(path, ec);
  if (ec) key = fs::absolute(path, ec);
  std::lock_guard lock(registry_mu);
  auto& slot = registry[key.string()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

boost::interprocess::file_lock OpenLock(const fs::path& path) {
  fs::path lock_path = path;
  lock_path += ".lock";
  { std::ofstream touch(lock_path, std::ios::app); }
  try {
    return boost::interprocess::file_lock(lock_path.c_str());
  } catch (const boost::interprocess::interprocess_exception& e) {
    throw Error(ErrorCode::kIo,
                "cannot lock " + lock_path.string() + ": " + e.what());
  }
}

}  // namespace

ScopedFileLock::ScopedFileLock(const fs::path& path)
    : local_(PathMutex(path)), lock_(OpenLock(path)) {
  lock_.lock();
}

ScopedFileLock::~ScopedFileLock() { lock_.unlock(); }

}  // namespace dpip
