#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "camarm/service/session.hpp"
#include "camarm/service/websocket.hpp"

namespace camarm {

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8765;  // 0 picks a free port
  // Virtual time: the sim only advances on {"type": "advance"} messages.
  bool virtual_time = false;
};

// Single-threaded poll loop: accepts clients, feeds their messages to the
// session between ticks, steps the session on the servo clock (real time) or
// on request (virtual time), and broadcasts state frames to every client.
class Server {
 public:
  // Binds and listens; throws std::runtime_error on bind failure.
  Server(Session& session, ServerConfig config);
  ~Server();

  int port() const { return port_; }
  void run(const std::atomic<bool>& stop);

 private:
  void accept_client();
  void serve_messages(WsSocket& c);
  void do_ticks(long n);
  void broadcast(const std::string& text);
  void drop_closed();

  Session& session_;
  ServerConfig config_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::vector<WsSocket> clients_;
};

}  // namespace camarm
