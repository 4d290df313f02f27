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

#include "dpip/http.hpp"

#include <cstdio>

#include "httplib.h"

#include "dpip/json_io.hpp"

namespace dpip {

namespace {

constexpr const char* kJson = "application/json";

void Reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void ReplyError(httplib::Response& res, int status, std::string_view code,
                const std::string& message = {}) {
  Json body = {{"error", code}};
  if (!message.empty()) body["message"] = message;
  Reply(res, status, body);
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownResource: return 404;
    case ErrorCode::kAuthFailure: return 403;
    case ErrorCode::kUnknownPeer: return 409;
    default: return 400;
  }
}

std::string BearerToken(const httplib::Request& req) {
  std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.compare(0, kPrefix.size(), kPrefix) != 0) return {};
  return header.substr(kPrefix.size());
}

Json ParseBody(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kMalformed, "request body is not JSON");
  }
}

// Runs `fn`, mapping Error and JSON exceptions onto error responses.
template <typename Fn>
void Guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    ReplyError(res, StatusFor(e.code()), ErrorCodeName(e.code()), e.what());
  } catch (const Json::exception& e) {
    ReplyError(res, 400, "malformed", e.what());
  }
}

Json ResourceNamesToJson(const std::vector<ResourceName>& names) {
  Json out = Json::array();
  for (const auto& n : names) {
    out.push_back(
        {{"resource_id", n.resource_id}, {"display_name", n.display_name}});
  }
  return out;
}

Bytes DecodeB64Member(const Json& j, const char* key) {
  auto raw = crypto::FromBase64(JsonString(j, key));
  if (!raw) {
    throw Error(ErrorCode::kMalformed, std::string(key) + " is not base64");
  }
  return *raw;
}

}  // namespace

// ---- server ---------------------------------------------------------------

HttpServer::HttpServer(ServerContext context)
    : ctx_(std::move(context)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

HttpServer::~HttpServer() { Stop(); }

void HttpServer::Routes() {
  auto& s = *server_;
  ServerContext& ctx = ctx_;

  s.Get("/v1/resources", [&ctx](const httplib::Request&,
                                httplib::Response& res) {
    Reply(res, 200, ResourceNamesToJson(ctx.gateway->ListResources()));
  });

  s.Post("/v1/access/initiate", [&ctx](const httplib::Request& req,
                                       httplib::Response& res) {
    Guarded(res, [&] {
      Json body = ParseBody(req);
      InitiateResponse r = ctx.gateway->Initiate(
          JsonString(body, "resource_id"), JsonString(body, "requester_domain"));
      if (r.challenge) {
        Reply(res, 200,
              {{"challenge_id", r.challenge->challenge_id},
               {"required", ToJson(r.challenge->required)},
               {"message", ToJson(r.challenge->message)}});
      } else {
        Reply(res, 200,
              {{"decision", "permit"},
               {"content_b64", crypto::ToBase64(r.content)}});
      }
    });
  });

  s.Post("/v1/access/complete", [&ctx](const httplib::Request& req,
                                       httplib::Response& res) {
    Guarded(res, [&] {
      Json body = ParseBody(req);
      std::string challenge_id = JsonString(body, "challenge_id");
      // Undecodable signatures still consume the challenge.
      auto sig = crypto::FromBase64(JsonString(body, "signature_b64"));
      CompleteResult r =
          ctx.gateway->Complete(challenge_id, sig ? *sig : Bytes{});
      char timing[64];
      std::snprintf(timing, sizeof(timing), "verify;dur=%.6f",
                    r.verify_s * 1000.0);
      res.set_header("Server-Timing", timing);
      if (r.decision.permitted()) {
        Reply(res, 200,
              {{"decision", "permit"},
               {"content_b64", crypto::ToBase64(r.content)}});
      } else {
        int status =
            r.decision.deny_reason == DenyReason::kExpiredChallenge ? 410 : 200;
        Reply(res, status, ToJson(r.decision));
      }
    });
  });

  s.Get("/v1/federation/tpk", [&ctx](const httplib::Request&,
                                     httplib::Response& res) {
    Reply(res, 200, {{"tpk_b64", crypto::ToBase64(abs::Encode(ctx.tpk))}});
  });

  s.Get("/v1/federation/apk", [&ctx](const httplib::Request&,
                                     httplib::Response& res) {
    Reply(res, 200,
          {{"domain_id", ctx.apk.domain_id},
           {"apk_b64", crypto::ToBase64(abs::Encode(ctx.apk))}});
  });

  s.Post("/v1/admin/resources", [&ctx](const httplib::Request& req,
                                       httplib::Response& res) {
    Guarded(res, [&] {
      std::string token = BearerToken(req);
      Json body = ParseBody(req);
      ResourceRecord r;
      r.resource_id = JsonString(body, "resource_id");
      r.display_name = body.value("display_name", r.resource_id);
      r.content = DecodeB64Member(body, "content_b64");
      std::string id = ctx.pap->PutResource(token, std::move(r));
      if (ctx.log) ctx.log("admin put resource " + id);
      Reply(res, 200, {{"ok", true}, {"resource_id", id}});
    });
  });

  s.Post("/v1/admin/policies", [&ctx](const httplib::Request& req,
                                      httplib::Response& res) {
    Guarded(res, [&] {
      std::string token = BearerToken(req);
      Policy p = PolicyFromJson(ParseBody(req));
      std::string id = p.resource_id;
      ctx.pap->PutPolicy(token, std::move(p));
      if (ctx.log) ctx.log("admin put policy " + id);
      Reply(res, 200, {{"ok", true}, {"resource_id", id}});
    });
  });

  s.Post("/v1/admin/users", [&ctx](const httplib::Request& req,
                                   httplib::Response& res) {
    Guarded(res, [&] {
      std::string token = BearerToken(req);
      Json body = ParseBody(req);
      auto user = UserRecord::Make(JsonString(body, "user_id"),
                                   AttributesFromJson(body.value(
                                       "attributes", Json::array())));
      std::string id = user.user_id;
      ctx.pip->PutUser(token, std::move(user));
      if (ctx.log) ctx.log("admin put user " + id);
      Reply(res, 200, {{"ok", true}, {"user_id", id}});
    });
  });
}

int HttpServer::Start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kTransport,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpServer::Run(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kTransport,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  server_->listen_after_bind();
}

void HttpServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

// ---- client ---------------------------------------------------------------

struct HttpPeerTransport::Impl {
  explicit Impl(const std::string& base_url) : base(base_url), cli(base_url) {
    cli.set_keep_alive(true);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(30);
  }

  httplib::Result Get(const char* path) {
    auto r = cli.Get(path);
    Check(r, path);
    return r;
  }
  httplib::Result Post(const char* path, const Json& body) {
    auto r = cli.Post(path, body.dump(), kJson);
    Check(r, path);
    return r;
  }
  void Check(const httplib::Result& r, const char* path) const {
    if (!r) {
      throw Error(ErrorCode::kTransport,
                  base + path + ": " + httplib::to_string(r.error()));
    }
  }
  Json Body(const httplib::Result& r, const char* path) const {
    try {
      return Json::parse(r->body);
    } catch (const Json::exception&) {
      throw Error(ErrorCode::kTransport,
                  base + path + ": response is not JSON (status " +
                      std::to_string(r->status) + ")");
    }
  }
  [[noreturn]] void Unexpected(const httplib::Result& r,
                               const char* path) const {
    throw Error(ErrorCode::kTransport, base + path + ": unexpected status " +
                                           std::to_string(r->status) + " " +
                                           r->body);
  }

  std::string base;
  httplib::Client cli;
};

HttpPeerTransport::HttpPeerTransport(std::string base_url)
    : impl_(std::make_unique<Impl>(base_url)) {}

HttpPeerTransport::~HttpPeerTransport() = default;

std::vector<ResourceName> HttpPeerTransport::ListResources() {
  const char* path = "/v1/resources";
  auto r = impl_->Get(path);
  if (r->status != 200) impl_->Unexpected(r, path);
  Json body = impl_->Body(r, path);
  std::vector<ResourceName> out;
  try {
    for (const auto& item : body) {
      out.push_back({JsonString(item, "resource_id"),
                     JsonString(item, "display_name")});
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransport, e.what());
  }
  return out;
}

InitiateResponse HttpPeerTransport::Initiate(
    const std::string& resource_id, const std::string& requester_domain) {
  const char* path = "/v1/access/initiate";
  auto r = impl_->Post(path, {{"resource_id", resource_id},
                              {"requester_domain", requester_domain}});
  InitiateResponse out;
  if (r->status == 404) {
    out.decision = Decision::Deny(DenyReason::kUnknownResource);
    return out;
  }
  if (r->status == 409) {
    out.decision = Decision::Deny(DenyReason::kUnknownPeer);
    return out;
  }
  if (r->status != 200) impl_->Unexpected(r, path);
  Json body = impl_->Body(r, path);
  try {
    if (body.contains("challenge_id")) {
      out.challenge = ChallengeOffer{JsonString(body, "challenge_id"),
                                     RequiredPredicateFromJson(body["required"]),
                                     AccessMessageFromJson(body["message"])};
    } else if (JsonString(body, "decision") == "permit") {
      out.decision = Decision::Permit();
      out.content = DecodeB64Member(body, "content_b64");
    } else {
      impl_->Unexpected(r, path);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransport, e.what());
  }
  return out;
}

CompleteResponse HttpPeerTransport::Complete(
    const std::string& challenge_id, std::span<const std::uint8_t> sig) {
  const char* path = "/v1/access/complete";
  auto r = impl_->Post(path, {{"challenge_id", challenge_id},
                              {"signature_b64", crypto::ToBase64(sig)}});
  if (r->status != 200 && r->status != 410) impl_->Unexpected(r, path);
  Json body = impl_->Body(r, path);

  CompleteResponse out{Decision::Deny(DenyReason::kBadSignature), {}, {}};
  std::string timing = r->get_header_value("Server-Timing");
  double ms = 0;
  if (std::sscanf(timing.c_str(), "verify;dur=%lf", &ms) == 1) {
    out.verify_s = ms / 1000.0;
  }
  try {
    if (JsonString(body, "decision") == "permit") {
      out.decision = Decision::Permit();
      out.content = DecodeB64Member(body, "content_b64");
    } else {
      auto reason = ParseDenyReason(JsonString(body, "reason"));
      if (!reason) impl_->Unexpected(r, path);
      out.decision = Decision::Deny(*reason);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransport, e.what());
  }
  return out;
}

abs::TrusteePublicKey HttpPeerTransport::FetchTpk() {
  const char* path = "/v1/federation/tpk";
  auto r = impl_->Get(path);
  if (r->status != 200) impl_->Unexpected(r, path);
  try {
    return abs::DecodeTpk(DecodeB64Member(impl_->Body(r, path), "tpk_b64"));
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransport, e.what());
  }
}

abs::AuthorityPublicKey HttpPeerTransport::FetchApk() {
  const char* path = "/v1/federation/apk";
  auto r = impl_->Get(path);
  if (r->status != 200) impl_->Unexpected(r, path);
  try {
    return abs::DecodeApk(DecodeB64Member(impl_->Body(r, path), "apk_b64"));
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransport, e.what());
  }
}

TransportFactory HttpTransportFactory() {
  return [](const PeerEntry& peer) -> std::unique_ptr<PeerTransport> {
    if (peer.base_url.empty()) {
      throw Error(ErrorCode::kUnknownPeer,
                  "peer '" + peer.domain_id + "' has no base_url");
    }
    return std::make_unique<HttpPeerTransport>(peer.base_url);
  };
}

std::pair<int, std::string> AdminPost(const std::string& base_url,
                                      const std::string& token,
                                      const std::string& kind,
                                      const std::string& body) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(5);
  httplib::Headers headers = {{"Authorization", "Bearer " + token}};
  std::string path = "/v1/admin/" + kind;
  auto r = cli.Post(path, headers, body, kJson);
  if (!r) {
    throw Error(ErrorCode::kTransport,
                base_url + path + ": " + httplib::to_string(r.error()));
  }
  return {r->status, r->body};
}

}  // namespace dpip
