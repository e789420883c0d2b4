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

#pragma once

// HTTP JSON API over a StudyService.
//
//   POST /api/sessions                    {"experiment", "profile"} -> {"session"}
//   GET  /api/sessions/{token}/next       -> {"done", "stimulus"?}
//   POST /api/sessions/{token}/responses  submission -> {"seq"}
//   GET  /api/experiments/{id}/export     Bearer admin token -> JSONL
//   GET  /api/images/{id}                 -> PNG
//
// Errors are {"error": message} with 400 (validation), 401 (token), 404
// (unknown resource) or 409 (conflict).

#include <memory>
#include <string>

#include "latentatlas/study_service.hpp"

namespace latentatlas::study {

inline constexpr const char* kAdminTokenEnv = "STUDY_ADMIN_TOKEN";

class StudyHttpServer {
 public:
  /// An empty `admin_token` disables export.
  StudyHttpServer(StudyService& service, std::string admin_token);
  ~StudyHttpServer();
  StudyHttpServer(const StudyHttpServer&) = delete;
  StudyHttpServer& operator=(const StudyHttpServer&) = delete;

  /// Binds to `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();
  bool running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace latentatlas::study
