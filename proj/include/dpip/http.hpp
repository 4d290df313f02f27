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

// HTTP/JSON binding of the federation and admin endpoints.
//
//   GET  /v1/resources            -> [{resource_id, display_name}]
//   POST /v1/access/initiate      {resource_id, requester_domain}
//   POST /v1/access/complete      {challenge_id, signature_b64}
//   GET  /v1/federation/tpk       -> {tpk_b64}
//   GET  /v1/federation/apk       -> {domain_id, apk_b64}
//   POST /v1/admin/resources      {resource_id, display_name, content_b64}
//   POST /v1/admin/policies       {resource_id, entries}
//   POST /v1/admin/users          {user_id, attributes}
//
// Status mapping: 404 unknown-resource, 403 auth-failure, 409 unknown-peer,
// 410 expired-challenge, 400 malformed request. Denials after verification
// are 200 with decision "deny". The complete response carries the
// verification time in a Server-Timing header ("verify;dur=<ms>").

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "dpip/federation.hpp"

namespace httplib {
class Server;
}

namespace dpip {

struct ServerContext {
  Gateway* gateway = nullptr;
  Pap* pap = nullptr;
  Pip* pip = nullptr;
  abs::TrusteePublicKey tpk;
  abs::AuthorityPublicKey apk;
  Logger log;
};

class HttpServer {
 public:
  explicit HttpServer(ServerContext context);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port. Throws kTransport when binding fails.
  int Start(const std::string& host, int port);
  // Binds and serves on the calling thread until Stop().
  void Run(const std::string& host, int port);
  void Stop();
  int port() const { return port_; }

 private:
  void Routes();

  ServerContext ctx_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

class HttpPeerTransport : public PeerTransport {
 public:
  // base_url like "http://127.0.0.1:8081".
  explicit HttpPeerTransport(std::string base_url);
  ~HttpPeerTransport() override;

  std::vector<ResourceName> ListResources() override;
  InitiateResponse Initiate(const std::string& resource_id,
                            const std::string& requester_domain) override;
  CompleteResponse Complete(const std::string& challenge_id,
                            std::span<const std::uint8_t> sig) override;
  abs::TrusteePublicKey FetchTpk() override;
  abs::AuthorityPublicKey FetchApk() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TransportFactory HttpTransportFactory();

// Admin client call: POSTs `body` to /v1/admin/<kind> with a bearer token.
// Returns the HTTP status and response body. Throws kTransport.
std::pair<int, std::string> AdminPost(const std::string& base_url,
                                      const std::string& token,
                                      const std::string& kind,
                                      const std::string& body);

}  // namespace dpip
