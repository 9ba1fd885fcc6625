#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "apldf/session.hpp"

namespace apldf {

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  double pace = 1.0;           // simulated seconds per wall second, 0 = unpaced
  double resume_timeout_s = 120.0;
  std::size_t max_queued_ticks = 20;  // one second of client ticks
  std::size_t io_threads = 2;
  SessionConfig session;
};

/// HTTP + WebSocket front end for live sessions.
///
///   GET /routes                      route names and lengths (JSON)
///   GET /profile/<i>[?session=<id>]  iteration i profile (CSV)
///   GET /history[?session=<id>]      iteration manifest (JSON)
///   WS  /session[?resume=<id>]       session protocol, JSON text frames
///
/// HTTP queries without a session id use the most recently attached session.
class Server {
 public:
  Server(ServerConfig config, std::shared_ptr<const RouteRegistry> routes);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the I/O threads. Returns the bound port.
  unsigned short start();
  /// Idempotent. Aborts running laps and joins all threads.
  void stop();

  struct Impl;  // internal, named by the connection classes

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace apldf
