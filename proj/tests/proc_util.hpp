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

// Process and file helpers for tests that drive the shared library or the
// dpip binary. Depends on nothing but POSIX and nlohmann::json.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

extern char** environ;

namespace dpip::proc {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void Spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "dpip-proc-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

// A loopback port nothing is listening on right now.
inline int FreePort() {
  int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (fd < 0 || bind(fd, reinterpret_cast<sockaddr*>(&addr), len) != 0 ||
      getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    if (fd >= 0) close(fd);
    throw std::runtime_error("cannot find a free port");
  }
  close(fd);
  return ntohs(addr.sin_port);
}

inline bool PortOpen(int port) {
  int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  bool ok = connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
  close(fd);
  return ok;
}

inline Json Attr(const std::string& category, const std::string& name,
                 const std::string& value) {
  return {{"category", category}, {"name", name}, {"value", value}};
}

inline Json AliceJson() {
  return Json::array({Attr("Subject", "first_name", "Alice"),
                      Attr("Subject", "position", "cardiologist"),
                      Attr("Subject", "hospital", "Box Hill"),
                      Attr("Environment", "city", "Melbourne")});
}

inline const std::string kRecordBytes =
    std::string("Patient record 0042\nbp=120/80\x01\x02\xff", 32);

// Two domains, d1 (holds the record) and d2 (holds Alice), each with an
// INI config pointing at the other and a shared TPK file. The caller
// creates the TPK at `tpk` before opening either domain.
struct TwoDomains {
  fs::path root;
  fs::path tpk;
  fs::path d1_ini, d2_ini;
  int d1_port = 0, d2_port = 0;
  std::string d1_token = "tok-d1", d2_token = "tok-d2";

  std::string d1_url() const {
    return "http://127.0.0.1:" + std::to_string(d1_port);
  }
  std::string d2_url() const {
    return "http://127.0.0.1:" + std::to_string(d2_port);
  }
};

inline TwoDomains WriteTwoDomains(const fs::path& root,
                                  const std::string& cache_mode = "cached") {
  TwoDomains t;
  t.root = root;
  t.tpk = root / "federation.tpk";
  t.d1_port = FreePort();
  do {
    t.d2_port = FreePort();
  } while (t.d2_port == t.d1_port);
  t.d1_ini = root / "d1.ini";
  t.d2_ini = root / "d2.ini";
  auto ini = [&](const std::string& id, int port, const std::string& token,
                 const std::string& peer, const std::string& peer_url) {
    std::ostringstream os;
    os << "[domain]\nid = " << id << "\nlisten = 127.0.0.1\nport = " << port
       << "\ndata_dir = " << id << "-data\nadmin_token = " << token
       << "\ntpk = federation.tpk\ncache_mode = " << cache_mode
       << "\n\n[peer:" << peer << "]\nbase_url = " << peer_url << "\n";
    return os.str();
  };
  Spit(t.d1_ini, ini("d1", t.d1_port, t.d1_token, "d2", t.d2_url()));
  Spit(t.d2_ini, ini("d2", t.d2_port, t.d2_token, "d1", t.d1_url()));
  return t;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs `argv` to completion with stdout and stderr captured in files.
inline RunResult Run(const std::vector<std::string>& argv,
                     const fs::path& scratch) {
  static int counter = 0;
  std::string tag = std::to_string(getpid()) + "-" + std::to_string(counter++);
  fs::path out = scratch / ("run-" + tag + ".out");
  fs::path err = scratch / ("run-" + tag + ".err");
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, out.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&fa, 2, err.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  int rc = posix_spawn(&pid, args[0], &fa, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw std::runtime_error("posix_spawn failed for " + argv[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  r.out = Slurp(out);
  r.err = Slurp(err);
  return r;
}

// A background process with its output appended to a log file. Killed with
// SIGTERM on destruction.
class Daemon {
 public:
  Daemon(const std::vector<std::string>& argv, fs::path log) : log_(std::move(log)) {
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&fa, 1, log_.c_str(),
                                     O_WRONLY | O_CREAT | O_APPEND, 0644);
    posix_spawn_file_actions_adddup2(&fa, 1, 2);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    int rc = posix_spawn(&pid_, args[0], &fa, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    if (rc != 0) throw std::runtime_error("posix_spawn failed for " + argv[0]);
  }
  ~Daemon() { Stop(); }
  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  // Polls until `port` accepts connections or the process exits.
  bool WaitForPort(int port, std::chrono::milliseconds limit =
                                 std::chrono::milliseconds(5000)) {
    auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      if (PortOpen(port)) return true;
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return false;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return false;
  }

  int Stop() {
    if (pid_ <= 0) return -1;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }

  std::string Log() const { return Slurp(log_); }

 private:
  fs::path log_;
  pid_t pid_ = -1;
};

// Lines of `text` containing `needle`.
inline int CountLines(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.find(needle) != std::string::npos) ++n;
  }
  return n;
}

}  // namespace dpip::proc
