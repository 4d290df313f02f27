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

// dpip command-line front end. Links only the C API.
//
// Exit codes: 0 success, 1 deny, 2 usage/config error, 3 transport error.

#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dpip/dpip.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDeny = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

using Json = nlohmann::json;

bool g_json = false;

int ExitCodeFor(int status) {
  switch (status) {
    case DPIP_OK: return kExitOk;
    case DPIP_DENY: return kExitDeny;
    case DPIP_ERR_TRANSPORT: return kExitTransport;
    default: return kExitUsage;
  }
}

int Report(int status, const std::string& message) {
  int code = ExitCodeFor(status);
  if (g_json) {
    Json j = {{"status", dpip_status_name(status)},
              {"exit_code", code},
              {"error", message}};
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "dpip: " << dpip_status_name(status) << ": " << message
              << "\n";
  }
  return code;
}

int ReportLast(int status) { return Report(status, dpip_last_error()); }

// Takes ownership of a C string handed out by the library.
std::string Take(char* s) {
  std::string out = s ? s : "";
  dpip_free(s);
  return out;
}

struct DomainHandle {
  dpip_domain* d = nullptr;
  ~DomainHandle() { dpip_domain_close(d); }
};

bool ReadInput(const std::string& path, std::string& out) {
  if (path == "-") {
    out.assign(std::istreambuf_iterator<char>(std::cin), {});
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  out.assign(std::istreambuf_iterator<char>(in), {});
  return true;
}

int CmdServe(const std::string& config, const std::string& data_dir,
             bool quiet) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  DomainHandle h;
  int st = dpip_domain_open(config.c_str(), data_dir.c_str(), quiet ? 0 : 1,
                            &h.d);
  if (st != DPIP_OK) return ReportLast(st);
  int port = 0;
  st = dpip_domain_start(h.d, &port);
  if (st != DPIP_OK) return ReportLast(st);
  std::cerr << "dpip: listening on port " << port << "\n" << std::flush;

  int sig = 0;
  sigwait(&set, &sig);
  dpip_domain_stop(h.d);
  return kExitOk;
}

int CmdTrusteeInit(const std::string& out, const std::string& federation) {
  int st = dpip_trustee_init(federation.c_str(), out.c_str());
  if (st != DPIP_OK) return ReportLast(st);
  if (g_json) {
    std::cout << Json{{"tpk_path", out}, {"federation_id", federation}}.dump()
              << "\n";
  }
  return kExitOk;
}

int CmdAdmin(const std::string& kind, const std::string& input,
             const std::string& config, const std::string& data_dir,
             std::string url, std::string token,
             const std::string& content_file) {
  std::string body;
  if (!ReadInput(input, body)) {
    return Report(DPIP_ERR_USAGE, "cannot read " + input);
  }
  if (!content_file.empty()) {
    std::string raw;
    if (!ReadInput(content_file, raw)) {
      return Report(DPIP_ERR_USAGE, "cannot read " + content_file);
    }
    Json doc = Json::parse(body, nullptr, false);
    if (!doc.is_object()) {
      return Report(DPIP_ERR_USAGE, "admin input must be a JSON object");
    }
    char* b64 = nullptr;
    int st = dpip_base64_encode(reinterpret_cast<const uint8_t*>(raw.data()),
                                raw.size(), &b64);
    if (st != DPIP_OK) return ReportLast(st);
    doc["content_b64"] = Take(b64);
    body = doc.dump();
  }
  if (url.empty() || token.empty()) {
    if (config.empty()) {
      return Report(DPIP_ERR_USAGE, "admin needs --config or --url/--token");
    }
    DomainHandle h;
    int st = dpip_domain_open(config.c_str(), data_dir.c_str(), 0, &h.d);
    if (st != DPIP_OK) return ReportLast(st);
    char* s = nullptr;
    if (url.empty() && dpip_domain_url(h.d, &s) == DPIP_OK) url = Take(s);
    if (token.empty() && dpip_domain_admin_token(h.d, &s) == DPIP_OK) {
      token = Take(s);
    }
  }
  char* response = nullptr;
  int st = dpip_admin_post(url.c_str(), token.c_str(), kind.c_str(),
                           body.c_str(), &response);
  std::string text = Take(response);
  if (st != DPIP_OK) return ReportLast(st);
  if (g_json) std::cout << text << "\n";
  return kExitOk;
}

// Returns an exit code: 0 once the domain is open.
int OpenDomain(const std::string& config, const std::string& data_dir,
               DomainHandle& h) {
  if (config.empty()) return Report(DPIP_ERR_USAGE, "--config is required");
  int st = dpip_domain_open(config.c_str(), data_dir.c_str(), 0, &h.d);
  return st == DPIP_OK ? kExitOk : ReportLast(st);
}

int CmdClientLs(const std::string& config, const std::string& data_dir,
                const std::string& peer) {
  DomainHandle h;
  if (int rc = OpenDomain(config, data_dir, h)) return rc;
  char* out = nullptr;
  int st = dpip_client_list(h.d, peer.c_str(), &out);
  if (st != DPIP_OK) return ReportLast(st);
  std::string list = Take(out);
  if (g_json) {
    std::cout << list << "\n";
  } else {
    for (const auto& r : Json::parse(list)) {
      std::cout << r.value("resource_id", "") << "\t"
                << r.value("display_name", "") << "\n";
    }
  }
  return kExitOk;
}

int CmdClientGet(const std::string& config, const std::string& data_dir,
                 const std::string& peer, const std::string& resource,
                 const std::string& user, const std::string& mode,
                 const std::string& out_path) {
  DomainHandle h;
  if (int rc = OpenDomain(config, data_dir, h)) return rc;
  char* result = nullptr;
  uint8_t* content = nullptr;
  size_t length = 0;
  int st = dpip_client_get(h.d, peer.c_str(), resource.c_str(), user.c_str(),
                       mode.c_str(), &result, &content, &length);
  std::string result_json = Take(result);
  if (st != DPIP_OK && st != DPIP_DENY) {
    dpip_free(content);
    return ReportLast(st);
  }
  if (st == DPIP_OK) {
    if (out_path.empty()) {
      std::cout.write(reinterpret_cast<const char*>(content),
                      static_cast<std::streamsize>(length));
      std::cout.flush();
    } else {
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(content),
                static_cast<std::streamsize>(length));
      if (!out) {
        dpip_free(content);
        return Report(DPIP_ERR_IO, "cannot write " + out_path);
      }
    }
  }
  dpip_free(content);
  if (g_json) {
    std::cerr << result_json << "\n";
  } else if (st == DPIP_DENY) {
    std::string reason =
        Json::parse(result_json, nullptr, false).value("reason", "deny");
    std::cerr << "dpip: deny: " << reason << "\n";
  }
  return st == DPIP_OK ? kExitOk : kExitDeny;
}

int CmdBench(const std::string& config, const std::string& out,
             const std::string& work) {
  char* summary = nullptr;
  int st = dpip_bench_run(config.c_str(), out.c_str(), work.c_str(), &summary);
  std::string text = Take(summary);
  if (st != DPIP_OK) return ReportLast(st);
  if (g_json) {
    std::cout << text << "\n";
  } else {
    std::cout << "report written to " << out << "/summary.md\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpip: decentralized attribute-based access control"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json, "Machine-readable output");
  std::string data_dir;
  app.add_option("--data-dir", data_dir, "Override the domain data directory");

  std::string config, out, user, mode = "cached", url, token, federation,
                                 input, peer, resource, work, content_file;
  bool quiet = false;

  auto* serve = app.add_subcommand("serve", "Run a domain daemon");
  serve->add_option("--config", config, "Domain config file")->required();
  serve->add_flag("--quiet", quiet, "Do not log protocol events");

  auto* trustee =
      app.add_subcommand("trustee-init", "Create the federation TPK file");
  trustee->add_option("out", out, "Output path")->required();
  federation = "federation";
  trustee->add_option("--federation-id", federation, "Federation identifier");

  auto* admin = app.add_subcommand("admin", "Administer a running domain");
  admin->require_subcommand(1);
  admin->add_option("--config", config, "Domain config file");
  admin->add_option("--url", url, "Domain base URL");
  admin->add_option("--token", token,
                    "Admin token (default: config or DPIP_ADMIN_TOKEN)");
  std::string kind;
  for (auto [name, k] : {std::pair{"add-user", "users"},
                         std::pair{"add-resource", "resources"},
                         std::pair{"add-policy", "policies"}}) {
    auto* sub = admin->add_subcommand(name, std::string("POST a JSON ") +
                                                "document to /v1/admin/" + k);
    sub->add_option("input", input, "JSON file, or - for stdin")->required();
    sub->add_option("--config", config, "Domain config file");
    sub->add_option("--url", url, "Domain base URL");
    sub->add_option("--token", token, "Admin token");
    if (std::string(name) == "add-resource") {
      sub->add_option("--content-file", content_file,
                      "Resource bytes to embed as content_b64");
    }
    sub->callback([&kind, k = std::string(k)] { kind = k; });
  }

  auto* client = app.add_subcommand("client", "Act as a requesting client");
  client->require_subcommand(1);
  client->add_option("--config", config, "Domain config file");
  auto* ls = client->add_subcommand("ls", "List a peer's resources");
  ls->add_option("peer", peer, "Peer domain id")->required();
  auto* get = client->add_subcommand("get", "Fetch a peer's resource");
  get->add_option("peer", peer, "Peer domain id")->required();
  get->add_option("resource", resource, "Resource id")->required();
  get->add_option("--user", user, "Local user id")->required();
  get->add_option("--mode", mode, "Key mode")
      ->check(CLI::IsMember({"fresh", "cached"}));
  get->add_option("--out", out, "Write content here instead of stdout");
  for (auto* sub : {ls, get}) sub->add_option("--config", config);

  auto* bench = app.add_subcommand("bench", "Key generation vs storage timing");
  bench->require_subcommand(1);
  auto* run = bench->add_subcommand("run", "Run the benchmark");
  run->add_option("--config", config, "Benchmark config file")->required();
  run->add_option("--out", out, "Report directory")->required();
  run->add_option("--work", work, "Scratch directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (g_json) return Report(DPIP_ERR_USAGE, e.what());
    app.exit(e);
    return kExitUsage;
  }

  if (*serve) return CmdServe(config, data_dir, quiet);
  if (*trustee) return CmdTrusteeInit(out, federation);
  if (*admin) {
    return CmdAdmin(kind, input, config, data_dir, url, token, content_file);
  }
  if (*ls) return CmdClientLs(config, data_dir, peer);
  if (*get) {
    return CmdClientGet(config, data_dir, peer, resource, user, mode, out);
  }
  if (*run) return CmdBench(config, out, work);
  return kExitUsage;
}
