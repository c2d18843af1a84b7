#pragma once

#include <memory>
#include <string>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"
#include "annoserve/session.hpp"

namespace annoserve {

/// ANNOSERVE_PORT and ANNOSERVE_OUTPUT_DIR override the config's server
/// settings when set.
void apply_env_overrides(TaskConfig& config);

/// HTTP front of one task. Endpoints:
///   POST /signup  POST /login  POST /logout  GET /?id=...
///   GET /task  POST /submit  POST /navigate
///   GET /admin/progress  POST /admin/export
/// Static assets from server.static_dir are served under /app/. Any other
/// path is 404.
class AnnotationServer {
 public:
  AnnotationServer(const TaskConfig& config, InstanceStore store, SessionOptions options = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  /// bind() then run() on a background thread.
  int start(const std::string& host, int port);
  void stop();

  SessionManager& sessions();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace annoserve
