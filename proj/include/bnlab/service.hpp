#pragma once

// Read-only JSON inference service over one loaded bundle. The handler is a
// plain function of the request so it can be exercised without sockets; the
// HTTP server only adapts transport. Handlers share nothing mutable, so
// concurrent requests never wait on each other.

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include "bnlab/bundle.hpp"

namespace bnlab::api {

struct ServiceResponse {
  int status = 200;
  Json body;
};

class InferenceService {
 public:
  explicit InferenceService(ModelBundle bundle);

  const ModelBundle& bundle() const noexcept { return bundle_; }

  // GET  /health, /model, /scan?target=
  // POST /query    {target, evidence}
  // POST /mpe      {evidence}
  // POST /scenario {label, target, evidence}
  // POST /tornado  {target, state, evidence, window, top_k}
  // 400 malformed request (field errors), 404 unknown path, 405 wrong method,
  // 422 impossible evidence (culprits).
  ServiceResponse handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) const;

 private:
  ModelBundle bundle_;
};

/// HTTP transport for an InferenceService.
class HttpServer {
 public:
  explicit HttpServer(const InferenceService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to `port` (0 = any free port); returns the bound port, -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks the calling thread.
  bool listen();
  void stop();
  bool running() const;
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bnlab::api
