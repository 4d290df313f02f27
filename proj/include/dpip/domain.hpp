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

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpip/federation.hpp"
#include "dpip/http.hpp"
#include "dpip/key_cache.hpp"
#include "dpip/services.hpp"

namespace dpip {

struct PeerConfig {
  std::string domain_id;
  std::string base_url;
  AliasMap aliases;
  std::optional<abs::AuthorityPublicKey> pinned_apk;
};

// One INI file per domain; see docs/configuration.md.
struct DomainConfig {
  std::string domain_id;
  std::string listen_host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir;
  std::string admin_token;
  std::filesystem::path tpk_path;
  std::vector<PeerConfig> peers;
  CacheMode cache_mode = CacheMode::kCached;
  std::chrono::seconds challenge_ttl{60};
};

inline constexpr const char* kAdminTokenEnv = "DPIP_ADMIN_TOKEN";

// Relative paths resolve against the config file's directory. The admin
// token is taken from DPIP_ADMIN_TOKEN when set. Throws kConfig.
DomainConfig LoadDomainConfig(const std::filesystem::path& path);

// Everything one domain runs: stores, engines, federation endpoints and the
// requester client, wired over the data directory layout
//   <data>/users.json resources.json policies.json keycache.json
//   <data>/authority.json   (the domain's long-lived APK/ASK)
class Domain {
 public:
  struct Options {
    WallClock clock = SystemNow;
    Logger log;
    TransportFactory transport = HttpTransportFactory();
  };

  // Creates the data directory and the authority keys on first use.
  Domain(DomainConfig config, abs::TrusteePublicKey tpk, Options options);
  static std::unique_ptr<Domain> Open(DomainConfig config, Options options);
  ~Domain();

  const DomainConfig& config() const { return config_; }
  const abs::TrusteePublicKey& tpk() const { return tpk_; }
  const abs::AuthorityPublicKey& apk() const { return authority_.apk; }

  Pip& pip() { return pip_; }
  Pap& pap() { return pap_; }
  const Pdp& pdp() const { return pdp_; }
  Gateway& gateway() { return gateway_; }
  PeerRegistry& peers() { return peers_; }
  Requester& requester() { return requester_; }
  KeyCache& cache(CacheMode mode) {
    return mode == CacheMode::kFresh ? fresh_keys_ : cached_keys_;
  }

  // Serves the HTTP endpoints in the background; returns the bound port.
  int Start();
  void Stop();
  // Serves on the calling thread.
  void Serve();
  std::string base_url() const;

 private:
  DomainConfig config_;
  Options options_;
  abs::TrusteePublicKey tpk_;
  abs::AuthorityKeys authority_;
  StaticTokenAuthenticator auth_;
  Pip pip_;
  Pap pap_;
  Pdp pdp_;
  PeerRegistry peers_;
  Gateway gateway_;
  KeyCache fresh_keys_;
  KeyCache cached_keys_;
  Requester requester_;
  std::unique_ptr<HttpServer> server_;
  int bound_port_ = 0;
};

// Loads <data>/authority.json or creates it (under a file lock).
abs::AuthorityKeys LoadOrCreateAuthority(const std::filesystem::path& data_dir,
                                         const abs::TrusteePublicKey& tpk,
                                         const std::string& domain_id);

}  // namespace dpip
