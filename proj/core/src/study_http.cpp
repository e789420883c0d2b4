// Copyright 2026 The latentatlas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "latentatlas/study_http.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "latentatlas/errors.hpp"

namespace latentatlas::study {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const ValidationError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const InvalidInput& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const Unauthorized& e) {
      send_json(res, 401, {{"error", e.what()}});
    } catch (const NotFound& e) {
      send_json(res, 404, {{"error", e.what()}});
    } catch (const Conflict& e) {
      send_json(res, 409, {{"error", e.what()}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, 500, {{"error", "internal error"}});
    }
  };
}

}  // namespace

struct StudyHttpServer::Impl {
  StudyService& service;
  std::string admin_token;
  httplib::Server server;
};

StudyHttpServer::StudyHttpServer(StudyService& service, std::string admin_token)
    : impl_(new Impl{service, std::move(admin_token)}) {
  StudyService& svc = impl_->service;
  httplib::Server& srv = impl_->server;

  srv.Post("/api/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (!body.is_object() || !body.contains("experiment") || !body.contains("profile")) {
      throw ValidationError("expected {\"experiment\", \"profile\"}");
    }
    const ExpertProfile profile = profile_from_json(body["profile"]);
    const std::string token = svc.create_session(profile, body["experiment"].get<std::string>());
    send_json(res, 201, {{"session", token}});
  }));

  srv.Get(R"(/api/sessions/([^/]+)/next)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const std::optional<Stimulus> st = svc.next_stimulus(req.matches[1]);
            if (!st) {
              send_json(res, 200, {{"done", true}});
              return;
            }
            send_json(res, 200, {{"done", false}, {"stimulus", public_json(*st)}});
          }));

  srv.Post(R"(/api/sessions/([^/]+)/responses)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const ResponseSubmission sub = submission_from_json(json::parse(req.body));
             const std::int64_t seq = svc.submit_response(req.matches[1], sub);
             send_json(res, 201, {{"seq", seq}});
           }));

  Impl* impl = impl_.get();
  srv.Get(R"(/api/experiments/([^/]+)/export)",
          guarded([impl](const httplib::Request& req, httplib::Response& res) {
            const std::string auth = req.get_header_value("Authorization");
            if (impl->admin_token.empty() || auth != "Bearer " + impl->admin_token) {
              throw Unauthorized("admin token required");
            }
            res.status = 200;
            res.set_content(impl->service.export_responses(req.matches[1]),
                            "application/x-ndjson");
          }));

  srv.Get(R"(/api/images/([^/]+))",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const std::vector<std::uint8_t> png = svc.image_png(req.matches[1]);
            res.status = 200;
            res.set_content(std::string(png.begin(), png.end()), "image/png");
          }));
}

StudyHttpServer::~StudyHttpServer() { stop(); }

int StudyHttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind", host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind", host + ":" + std::to_string(port));
  }
  return port;
}

void StudyHttpServer::listen() { impl_->server.listen_after_bind(); }

void StudyHttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool StudyHttpServer::running() const { return impl_->server.is_running(); }

void StudyHttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace latentatlas::study
