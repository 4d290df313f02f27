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

#include <filesystem>
#include <memory>
#include <mutex>

#include <boost/interprocess/sync/file_lock.hpp>

#include "dpip/json_io.hpp"

namespace dpip {

// Returns `fallback` when the file does not exist. Throws kIo / kMalformed.
Json ReadJsonFile(const std::filesystem::path& path, Json fallback);

// Writes to a sibling temp file and renames it over `path`.
void WriteJsonFileAtomic(const std::filesystem::path& path, const Json& doc);

// Exclusive lock on `path`.lock for the lifetime of the object: a
// process-wide mutex per path, then an advisory file lock against other
// processes (which alone would not exclude threads of this process).
class ScopedFileLock {
 public:
  explicit ScopedFileLock(const std::filesystem::path& path);
  ~ScopedFileLock();
  ScopedFileLock(const ScopedFileLock&) = delete;
  ScopedFileLock& operator=(const ScopedFileLock&) = delete;

 private:
  std::unique_lock<std::mutex> local_;
  boost::interprocess::file_lock lock_;
};

}  // namespace dpip
