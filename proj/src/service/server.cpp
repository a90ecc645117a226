#include "camarm/service/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace camarm {

Server::Server(Session& session, ServerConfig config) : session_(session), config_(std::move(config)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
  if (::inet_pton(AF_INET, config_.bind.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::runtime_error("bad bind address " + config_.bind);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot bind " + config_.bind + ":" + std::to_string(config_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  for (auto& c : clients_) c.close();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::accept_client() {
  const int fd = ::accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) return;
  try {
    clients_.push_back(WsSocket::accept_upgrade(fd));
  } catch (const WsProtocolError&) {
    ::close(fd);
  }
  session_.set_clients(static_cast<int>(clients_.size()));
}

void Server::broadcast(const std::string& text) {
  for (auto& c : clients_) {
    if (!c.is_open()) continue;
    try {
      c.send_text(text);
    } catch (const WsProtocolError&) {
      c.close();
    }
  }
}

void Server::do_ticks(long n) {
  for (long i = 0; i < n; ++i)
    if (session_.tick()) broadcast(session_.state_frame().dump());
}

void Server::serve_messages(WsSocket& c) {
  try {
    if (!c.pump()) {
      c.close();
      return;
    }
    while (auto text = c.pop_message()) {
      nlohmann::json msg = nlohmann::json::parse(*text, nullptr, false);
      if (!msg.is_discarded() && msg.is_object() && msg.value("type", std::string()) == "advance") {
        nlohmann::json r = {{"type", "advance"}, {"seq", msg.contains("seq") ? msg["seq"] : nlohmann::json()}};
        if (!config_.virtual_time) {
          r = {{"type", "error"}, {"seq", r["seq"]}, {"code", "real_time"}, {"request", "advance"},
               {"message", "advance is only accepted in virtual-time mode"}};
        } else {
          long ticks = 0;
          if (msg.contains("ticks") && msg["ticks"].is_number_integer()) ticks = msg["ticks"].get<long>();
          else if (msg.contains("seconds") && msg["seconds"].is_number())
            ticks = std::lround(msg["seconds"].get<double>() * session_.sim().servo().rate);
          if (ticks < 0 || ticks > 10'000'000) {
            r = {{"type", "error"}, {"seq", r["seq"]}, {"code", "range"}, {"request", "advance"},
                 {"message", "advance needs 0 <= ticks <= 1e7"}};
          } else {
            do_ticks(ticks);
            r["ok"] = true;
            r["ticks"] = ticks;
            r["t"] = session_.time();
            r["mode"] = to_string(session_.mode());
          }
        }
        c.send_text(r.dump());
        continue;
      }
      for (const auto& r : session_.handle_text(*text)) c.send_text(r.dump());
    }
  } catch (const std::exception&) {
    c.close();
  }
}

void Server::drop_closed() {
  const auto n = clients_.size();
  clients_.erase(std::remove_if(clients_.begin(), clients_.end(), [](const WsSocket& c) { return !c.is_open(); }),
                 clients_.end());
  if (clients_.size() != n) session_.set_clients(static_cast<int>(clients_.size()));
}

void Server::run(const std::atomic<bool>& stop) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration<double>(session_.sim().servo().dt());
  auto next = clock::now();
  while (!stop.load()) {
    int timeout_ms = 50;
    if (!config_.virtual_time) {
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(next - clock::now()).count();
      timeout_ms = static_cast<int>(std::clamp<long>(wait, 0, 50));
    }
    std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}};
    for (const auto& c : clients_) fds.push_back({c.fd(), POLLIN, 0});
    ::poll(fds.data(), fds.size(), timeout_ms);
    if (fds[0].revents & POLLIN) accept_client();
    for (std::size_t i = 1; i < fds.size() && i - 1 < clients_.size(); ++i)
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) serve_messages(clients_[i - 1]);
    drop_closed();
    if (!config_.virtual_time) {
      long due = 0;
      const auto now = clock::now();
      while (next <= now && due < 40) {
        next += std::chrono::duration_cast<clock::duration>(period);
        ++due;
      }
      if (next <= now) next = now;  // overrun: drop the backlog rather than spiral
      do_ticks(due);
    }
  }
}

}  // namespace camarm
