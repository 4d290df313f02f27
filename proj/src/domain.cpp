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

#include "dpip/domain.hpp"

#include <cstdlib>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json_file.hpp"

namespace dpip {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kPeerSectionPrefix = "peer:";
constexpr std::string_view kAliasKeyPrefix = "alias.";

[[noreturn]] void ConfigError(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

// "Category:name"
AttributeName ParseQualifiedName(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    ConfigError("alias names must look like Category:name, got '" + text +
                "'");
  }
  auto category = ParseCategory(text.substr(0, colon));
  if (!category) ConfigError("unknown category in '" + text + "'");
  std::string name = text.substr(colon + 1);
  ValidateAttributeName(name);
  return {*category, std::move(name)};
}

fs::path Resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

const fs::path& PrepareDataDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create data directory " + dir.string());
  }
  return dir;
}

}  // namespace

DomainConfig LoadDomainConfig(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ptree_error& e) {
    ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : ".";

  DomainConfig cfg;
  try {
    const auto& d = tree.get_child("domain");
    cfg.domain_id = d.get<std::string>("id");
    cfg.listen_host = d.get<std::string>("listen", cfg.listen_host);
    cfg.port = d.get<int>("port", cfg.port);
    cfg.data_dir = Resolve(base, d.get<std::string>("data_dir"));
    cfg.admin_token = d.get<std::string>("admin_token", "");
    cfg.tpk_path = Resolve(base, d.get<std::string>("tpk"));
    std::string mode = d.get<std::string>("cache_mode", "cached");
    auto parsed = ParseCacheMode(mode);
    if (!parsed) ConfigError("cache_mode must be fresh or cached");
    cfg.cache_mode = *parsed;
    cfg.challenge_ttl = std::chrono::seconds(d.get<int>("challenge_ttl", 60));
  } catch (const pt::ptree_error& e) {
    ConfigError(std::string("[domain] section: ") + e.what());
  } catch (const Error& e) {
    ConfigError(e.what());
  }

  if (const char* env = std::getenv(kAdminTokenEnv); env && *env) {
    cfg.admin_token = env;
  }
  if (cfg.domain_id.empty()) ConfigError("domain id must be non-empty");
  if (cfg.port < 0 || cfg.port > 65535) ConfigError("port out of range");
  if (cfg.challenge_ttl.count() <= 0) {
    ConfigError("challenge_ttl must be positive");
  }

  for (const auto& [section, body] : tree) {
    if (section.rfind(kPeerSectionPrefix, 0) != 0) continue;
    PeerConfig peer;
    peer.domain_id = section.substr(kPeerSectionPrefix.size());
    if (peer.domain_id.empty()) ConfigError("peer section without a domain id");
    try {
      for (const auto& [key, value] : body) {
        std::string v = value.get_value<std::string>();
        if (key == "base_url") {
          peer.base_url = v;
        } else if (key == "apk_b64") {
          auto raw = crypto::FromBase64(v);
          if (!raw) ConfigError("peer " + peer.domain_id + ": bad apk_b64");
          peer.pinned_apk = abs::DecodeApk(*raw);
        } else if (key.rfind(kAliasKeyPrefix, 0) == 0) {
          peer.aliases.Insert(
              ParseQualifiedName(key.substr(kAliasKeyPrefix.size())),
              ParseQualifiedName(v));
        } else {
          ConfigError("peer " + peer.domain_id + ": unknown key '" + key +
                      "'");
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      ConfigError("peer " + peer.domain_id + ": " + e.what());
    }
    if (peer.base_url.empty()) {
      ConfigError("peer " + peer.domain_id + " needs a base_url");
    }
    cfg.peers.push_back(std::move(peer));
  }
  return cfg;
}

abs::AuthorityKeys LoadOrCreateAuthority(const fs::path& data_dir,
                                         const abs::TrusteePublicKey& tpk,
                                         const std::string& domain_id) {
  const fs::path path = data_dir / "authority.json";
  ScopedFileLock lock(path);
  Json doc = ReadJsonFile(path, nullptr);
  if (!doc.is_null()) {
    auto raw = crypto::FromBase64(JsonString(doc, "authority_b64"));
    if (!raw) throw Error(ErrorCode::kMalformed, "bad authority.json");
    auto keys = abs::DecodeAuthorityKeys(*raw);
    if (keys.apk.domain_id != domain_id) {
      throw Error(ErrorCode::kConfig, "authority.json belongs to domain '" +
                                          keys.apk.domain_id + "'");
    }
    return keys;
  }
  auto keys = abs::ASetup(tpk, domain_id);
  WriteJsonFileAtomic(path, {{"domain_id", domain_id},
                             {"authority_b64",
                              crypto::ToBase64(abs::Encode(keys))}});
  return keys;
}

Domain::Domain(DomainConfig config, abs::TrusteePublicKey tpk, Options options)
    : config_(std::move(config)),
      options_(std::move(options)),
      tpk_(std::move(tpk)),
      authority_(LoadOrCreateAuthority(PrepareDataDir(config_.data_dir), tpk_,
                                       config_.domain_id)),
      auth_(config_.admin_token),
      pip_(auth_, config_.data_dir / "users.json"),
      pap_(auth_, config_.data_dir / "resources.json",
           config_.data_dir / "policies.json"),
      pdp_(pap_, pip_),
      peers_(tpk_, options_.transport),
      gateway_(GatewayOptions{config_.domain_id, tpk_, config_.challenge_ttl,
                              options_.clock, options_.log},
               pap_, peers_),
      fresh_keys_(CacheMode::kFresh, tpk_, config_.domain_id, authority_),
      cached_keys_(CacheMode::kCached, tpk_, config_.domain_id, authority_,
                   config_.data_dir / "keycache.json"),
      requester_(config_.domain_id, tpk_, pip_, peers_, fresh_keys_,
                 cached_keys_) {
  for (const auto& p : config_.peers) {
    peers_.Configure({p.domain_id, p.base_url, p.aliases, p.pinned_apk});
  }
}

std::unique_ptr<Domain> Domain::Open(DomainConfig config, Options options) {
  auto tpk = abs::ReadTpkFile(config.tpk_path.string());
  return std::make_unique<Domain>(std::move(config), std::move(tpk),
                                  std::move(options));
}

Domain::~Domain() { Stop(); }

int Domain::Start() {
  server_ = std::make_unique<HttpServer>(
      ServerContext{&gateway_, &pap_, &pip_, tpk_, authority_.apk,
                    options_.log});
  bound_port_ = server_->Start(config_.listen_host, config_.port);
  return bound_port_;
}

void Domain::Stop() {
  if (server_) server_->Stop();
  server_.reset();
}

void Domain::Serve() {
  server_ = std::make_unique<HttpServer>(
      ServerContext{&gateway_, &pap_, &pip_, tpk_, authority_.apk,
                    options_.log});
  bound_port_ = config_.port;
  server_->Run(config_.listen_host, config_.port);
}

std::string Domain::base_url() const {
  return "http://" + config_.listen_host + ":" + std::to_string(bound_port_);
}

}  // namespace dpip
