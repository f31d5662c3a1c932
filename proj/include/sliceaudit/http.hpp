/*
 * Copyright 2026 The sliceaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <httplib.h>

#include "sliceaudit/error.hpp"
#include "sliceaudit/service.hpp"

namespace sliceaudit {

inline constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>sliceaudit</title></head>
<body><h1>sliceaudit</h1>
<p>No UI assets are mounted. Start the server with <code>--static-dir</code> to serve them.</p>
<ul>
<li><a href="/api/schema">/api/schema</a></li>
<li><a href="/api/overall">/api/overall</a></li>
<li><a href="/api/slices?top_k=10">/api/slices</a></li>
<li><a href="/api/graph?top_k=20">/api/graph</a></li>
</ul></body></html>
)";

/// Wires the service's endpoints (and optionally a static asset directory
/// at /) into an httplib server. `service` must outlive `server`.
inline void register_routes(httplib::Server& server, const Service& service,
                            const std::optional<std::filesystem::path>& static_dir = std::nullopt) {
  // httplib defaults to SO_REUSEPORT, which lets a second process share a
  // busy port silently. Plain SO_REUSEADDR makes the bind fail instead.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server.Get(R"(/api/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.get(req.path, req.params);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  if (static_dir) {
    if (!server.set_mount_point("/", static_dir->string()))
      throw Error("static asset directory not found: " + static_dir->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

}  // namespace sliceaudit
