#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "morphflow/live.hpp"

namespace morphflow::serve {

struct ServerOptions {
  std::string address = "127.0.0.1";
  /// 0 picks a free port; see Server::port().
  unsigned short port = 8080;
};

/// HTTP + websocket front end for a LiveService:
///   GET /health    service status JSON
///   GET /scenario  the active scenario document
///   /session       websocket carrying the JSON protocol
class Server {
 public:
  Server(LiveService& service, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Port actually bound.
  unsigned short port() const noexcept;

  /// Serves on `threads` background threads.
  void start(std::size_t threads = 1);
  /// Serves on the calling thread until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace morphflow::serve
