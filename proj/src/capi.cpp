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

#include "dpip/dpip.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

#include "dpip/bench.hpp"
#include "dpip/domain.hpp"
#include "dpip/json_io.hpp"

struct dpip_domain {
  std::unique_ptr<dpip::Domain> domain;
};

namespace {

using dpip::Error;
using dpip::ErrorCode;
using dpip::Json;

thread_local std::string last_error;

int Fail(int status, std::string message) {
  last_error = std::move(message);
  return status;
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTransport: return DPIP_ERR_TRANSPORT;
    case ErrorCode::kAuthFailure: return DPIP_ERR_AUTH;
    case ErrorCode::kUnknownUser:
    case ErrorCode::kUnknownResource:
    case ErrorCode::kUnknownPeer: return DPIP_ERR_NOT_FOUND;
    case ErrorCode::kConfig:
    case ErrorCode::kTpkMismatch: return DPIP_ERR_CONFIG;
    case ErrorCode::kIo: return DPIP_ERR_IO;
    default: return DPIP_ERR_USAGE;
  }
}

// Runs `body`, translating exceptions into a status and last_error.
template <typename F>
int Guard(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    return Fail(StatusFor(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(DPIP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(DPIP_ERR_INTERNAL, e.what());
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void SetString(char** out, const std::string& s) {
  if (out) *out = CopyString(s);
}

bool Missing(const char* s) { return s == nullptr || *s == '\0'; }

dpip::Logger StderrLogger() {
  auto mu = std::make_shared<std::mutex>();
  return [mu](std::string_view line) {
    std::lock_guard lock(*mu);
    std::string stamp = dpip::FormatTimestamp(dpip::SystemNow());
    std::fprintf(stderr, "%s %.*s\n", stamp.c_str(),
                 static_cast<int>(line.size()), line.data());
    std::fflush(stderr);
  };
}

Json TimingsJson(const dpip::PhaseTimings& t) {
  Json j = Json::object();
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("initiate_s", t.initiate_s);
  put("pip_s", t.pip_s);
  put("asetup_s", t.asetup_s);
  put("attrgen_s", t.attrgen_s);
  put("sign_s", t.sign_s);
  put("complete_s", t.complete_s);
  put("verify_s", t.verify_s);
  put("transfer_s", t.transfer_s);
  j["total_s"] = t.total_s;
  return j;
}

}  // namespace

extern "C" {

const char* dpip_version(void) { return "0.1.0"; }

const char* dpip_status_name(int status) {
  switch (status) {
    case DPIP_OK: return "ok";
    case DPIP_DENY: return "deny";
    case DPIP_ERR_USAGE: return "usage";
    case DPIP_ERR_TRANSPORT: return "transport";
    case DPIP_ERR_AUTH: return "auth-failure";
    case DPIP_ERR_NOT_FOUND: return "not-found";
    case DPIP_ERR_CONFIG: return "config";
    case DPIP_ERR_IO: return "io";
    case DPIP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dpip_last_error(void) { return last_error.c_str(); }

void dpip_free(void* p) { std::free(p); }

int dpip_base64_encode(const uint8_t* data, size_t len, char** out) {
  return Guard([&] {
    if ((!data && len) || !out) return Fail(DPIP_ERR_USAGE, "null argument");
    SetString(out, dpip::crypto::ToBase64({data, len}));
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_trustee_init(const char* federation_id, const char* out_path) {
  return Guard([&] {
    if (Missing(federation_id) || Missing(out_path)) {
      return Fail(DPIP_ERR_USAGE, "federation id and output path required");
    }
    auto tpk = dpip::abs::TsSetup(federation_id);
    dpip::abs::WriteTpkFile(out_path, tpk);
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_domain_open(const char* config_path, const char* data_dir,
                     int log_to_stderr, dpip_domain** out) {
  return Guard([&] {
    if (Missing(config_path) || !out) {
      return Fail(DPIP_ERR_USAGE, "config path required");
    }
    *out = nullptr;
    dpip::DomainConfig cfg = dpip::LoadDomainConfig(config_path);
    if (!Missing(data_dir)) cfg.data_dir = data_dir;
    dpip::Domain::Options options;
    if (log_to_stderr) options.log = StderrLogger();
    auto handle = std::make_unique<dpip_domain>();
    handle->domain = dpip::Domain::Open(std::move(cfg), std::move(options));
    *out = handle.release();
    return static_cast<int>(DPIP_OK);
  });
}

void dpip_domain_close(dpip_domain* domain) { delete domain; }

int dpip_domain_start(dpip_domain* domain, int* port_out) {
  return Guard([&] {
    if (!domain) return Fail(DPIP_ERR_USAGE, "null domain");
    int port = domain->domain->Start();
    if (port_out) *port_out = port;
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_domain_stop(dpip_domain* domain) {
  return Guard([&] {
    if (!domain) return Fail(DPIP_ERR_USAGE, "null domain");
    domain->domain->Stop();
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_domain_url(dpip_domain* domain, char** url_out) {
  return Guard([&] {
    if (!domain || !url_out) return Fail(DPIP_ERR_USAGE, "null argument");
    const auto& cfg = domain->domain->config();
    SetString(url_out, "http://" + cfg.listen_host + ":" +
                           std::to_string(cfg.port));
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_domain_admin_token(dpip_domain* domain, char** token_out) {
  return Guard([&] {
    if (!domain || !token_out) return Fail(DPIP_ERR_USAGE, "null argument");
    SetString(token_out, domain->domain->config().admin_token);
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_admin_post(const char* base_url, const char* token, const char* kind,
                    const char* json_body, char** response_out) {
  return Guard([&] {
    if (Missing(base_url) || Missing(kind) || !json_body) {
      return Fail(DPIP_ERR_USAGE, "base url, kind and body required");
    }
    std::string k = kind;
    if (k != "users" && k != "resources" && k != "policies") {
      return Fail(DPIP_ERR_USAGE, "unknown admin kind " + k);
    }
    if (!Json::accept(json_body)) {
      return Fail(DPIP_ERR_USAGE, "admin input is not valid JSON");
    }
    auto [status, body] =
        dpip::AdminPost(base_url, token ? token : "", k, json_body);
    SetString(response_out, body);
    if (status == 200) return static_cast<int>(DPIP_OK);
    std::string message = "HTTP " + std::to_string(status) + ": " + body;
    if (status == 403) return Fail(DPIP_ERR_AUTH, message);
    if (status == 404) return Fail(DPIP_ERR_NOT_FOUND, message);
    return Fail(DPIP_ERR_USAGE, message);
  });
}

int dpip_client_list(dpip_domain* domain, const char* peer, char** json_out) {
  return Guard([&] {
    if (!domain || Missing(peer) || !json_out) {
      return Fail(DPIP_ERR_USAGE, "domain, peer and output required");
    }
    Json list = Json::array();
    for (const auto& r : domain->domain->requester().ListRemote(peer)) {
      list.push_back(
          {{"resource_id", r.resource_id}, {"display_name", r.display_name}});
    }
    SetString(json_out, list.dump());
    return static_cast<int>(DPIP_OK);
  });
}

int dpip_client_get(dpip_domain* domain, const char* peer,
                    const char* resource_id, const char* user_id,
                    const char* mode, char** result_json_out,
                    uint8_t** content_out, size_t* content_len) {
  return Guard([&] {
    if (!domain || Missing(peer) || Missing(resource_id) ||
        Missing(user_id)) {
      return Fail(DPIP_ERR_USAGE, "domain, peer, resource and user required");
    }
    auto cache_mode = dpip::ParseCacheMode(Missing(mode) ? "cached" : mode);
    if (!cache_mode) return Fail(DPIP_ERR_USAGE, "mode must be fresh or cached");
    if (content_out) *content_out = nullptr;
    if (content_len) *content_len = 0;

    Json result = {{"peer", peer},
                   {"resource_id", resource_id},
                   {"user_id", user_id},
                   {"mode", dpip::CacheModeName(*cache_mode)}};
    dpip::Decision decision = dpip::Decision::Deny(
        dpip::DenyReason::kMissingAttribute);
    try {
      auto outcome = domain->domain->requester().RequestRemoteResource(
          peer, resource_id, user_id, *cache_mode);
      decision = outcome.decision;
      result["timings"] = TimingsJson(outcome.timings);
      result["peer_calls"] = outcome.peer_calls;
      result["content_length"] = outcome.content.size();
      if (decision.permitted() && content_out && content_len &&
          !outcome.content.empty()) {
        auto* buf = static_cast<uint8_t*>(std::malloc(outcome.content.size()));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, outcome.content.data(), outcome.content.size());
        *content_out = buf;
        *content_len = outcome.content.size();
      }
    } catch (const dpip::MissingAttributeError& e) {
      // Refused locally before anything was signed or sent for completion.
      Json names = Json::array();
      for (const auto& n : e.missing()) names.push_back(dpip::ToString(n));
      result["missing"] = names;
      result["peer_calls"] = Json::array({"initiate"});
      result["content_length"] = 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnknownUser) throw;
      result["missing"] = Json::array();
      result["peer_calls"] = Json::array({"initiate"});
      result["content_length"] = 0;
    }
    result["decision"] = decision.permitted() ? "permit" : "deny";
    result["reason"] = decision.reason();
    SetString(result_json_out, result.dump());
    return static_cast<int>(decision.permitted() ? DPIP_OK : DPIP_DENY);
  });
}

int dpip_pdp_decide(dpip_domain* domain, const char* user_id,
                    const char* resource_id, const char* request_attrs_json,
                    char** decision_json_out) {
  return Guard([&] {
    if (!domain || Missing(user_id) || Missing(resource_id)) {
      return Fail(DPIP_ERR_USAGE, "domain, user and resource required");
    }
    std::vector<dpip::Attribute> attrs;
    if (!Missing(request_attrs_json)) {
      Json j = Json::parse(request_attrs_json, nullptr, false);
      if (j.is_discarded()) {
        return Fail(DPIP_ERR_USAGE, "request attributes are not valid JSON");
      }
      attrs = dpip::AttributesFromJson(j);
    }
    dpip::Decision d =
        domain->domain->pdp().Decide(attrs, user_id, resource_id);
    SetString(decision_json_out, dpip::ToJson(d).dump());
    return static_cast<int>(d.permitted() ? DPIP_OK : DPIP_DENY);
  });
}

int dpip_bench_run(const char* config_path, const char* out_dir,
                   const char* work_dir, char** summary_json_out) {
  return Guard([&] {
    if (Missing(config_path) || Missing(out_dir)) {
      return Fail(DPIP_ERR_USAGE, "bench config and output directory required");
    }
    auto config = dpip::bench::LoadBenchConfig(config_path);
    std::filesystem::path work =
        Missing(work_dir) ? std::filesystem::path(out_dir) / "work"
                          : std::filesystem::path(work_dir);
    auto result = dpip::bench::RunBenchmark(config, work);
    dpip::bench::EmitReport(result, out_dir);
    std::error_code ec;
    if (Missing(work_dir)) std::filesystem::remove_all(work, ec);
    SetString(summary_json_out,
              dpip::bench::SummaryToJson(result.summary).dump());
    return static_cast<int>(DPIP_OK);
  });
}

}  // extern "C"
