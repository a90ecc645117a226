#include "camarm/service/websocket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <chrono>
#include <random>
#include <sstream>

namespace camarm {

namespace {

constexpr const char* kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

// Header lookup in a raw HTTP head (case-insensitive name).
std::string header(const std::string& head, const std::string& name) {
  std::istringstream is(head);
  std::string line;
  const std::string key = lower(name) + ":";
  while (std::getline(is, line)) {
    if (lower(line).rfind(key, 0) == 0) return trim(line.substr(key.size()));
  }
  return "";
}

bool contains_token(const std::string& value, const std::string& token) {
  std::istringstream is(value);
  std::string t;
  while (std::getline(is, t, ','))
    if (lower(trim(t)) == lower(token)) return true;
  return false;
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        pollfd p{fd, POLLOUT, 0};
        ::poll(&p, 1, 1000);
        continue;
      }
      throw WsProtocolError(std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

// Reads until "\r\n\r\n"; leftover bytes stay in `rest`.
std::string read_http_head(int fd, int timeout_ms, std::string& rest) {
  std::string buf;
  char tmp[2048];
  for (;;) {
    const auto end = buf.find("\r\n\r\n");
    if (end != std::string::npos) {
      rest = buf.substr(end + 4);
      return buf.substr(0, end + 2);
    }
    if (buf.size() > 16384) throw WsProtocolError("handshake: header too large");
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, timeout_ms) <= 0) throw WsProtocolError("handshake: timeout");
    const ssize_t n = ::recv(fd, tmp, sizeof tmp, 0);
    if (n <= 0) throw WsProtocolError("handshake: connection closed");
    buf.append(tmp, static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string ws_accept_key(const std::string& client_key) {
  const std::string s = client_key + kGuid;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(s.data(), s.size(), digest, &len, EVP_sha1(), nullptr) != 1) throw WsProtocolError("sha1 failed");
  return base64(digest, len);
}

std::string ws_encode(WsOpcode op, const std::string& payload, const std::optional<std::array<std::uint8_t, 4>>& mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mbit = mask ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mbit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mbit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mbit | 127));
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF));
  }
  if (!mask) return out + payload;
  for (auto b : *mask) out.push_back(static_cast<char>(b));
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(payload[i] ^ (*mask)[i % 4]));
  return out;
}

std::optional<WsFrame> ws_decode(std::string& buf, std::size_t max_payload) {
  if (buf.size() < 2) return std::nullopt;
  const auto b0 = static_cast<std::uint8_t>(buf[0]), b1 = static_cast<std::uint8_t>(buf[1]);
  if (b0 & 0x70) throw WsProtocolError("reserved bits set");
  const std::uint8_t op = b0 & 0x0F;
  if (!(op <= 0x2 || (op >= 0x8 && op <= 0xA))) throw WsProtocolError("bad opcode");
  WsFrame f;
  f.fin = b0 & 0x80;
  f.opcode = static_cast<WsOpcode>(op);
  f.masked = b1 & 0x80;
  std::uint64_t len = b1 & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buf.size() < 4) return std::nullopt;
    len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[2])) << 8) | static_cast<std::uint8_t>(buf[3]);
    pos = 4;
  } else if (len == 127) {
    if (buf.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<std::uint8_t>(buf[2 + i]);
    pos = 10;
  }
  if (op >= 0x8 && (len > 125 || !f.fin)) throw WsProtocolError("bad control frame");
  if (len > max_payload) throw WsProtocolError("payload too large");
  std::array<std::uint8_t, 4> key{};
  if (f.masked) {
    if (buf.size() < pos + 4) return std::nullopt;
    for (int i = 0; i < 4; ++i) key[i] = static_cast<std::uint8_t>(buf[pos + i]);
    pos += 4;
  }
  if (buf.size() < pos + len) return std::nullopt;
  f.payload = buf.substr(pos, len);
  if (f.masked)
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ key[i % 4]);
  buf.erase(0, pos + len);
  return f;
}

WsSocket::WsSocket(WsSocket&& o) noexcept { *this = std::move(o); }

WsSocket& WsSocket::operator=(WsSocket&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    client_ = o.client_;
    closed_ = o.closed_;
    inbuf_ = std::move(o.inbuf_);
    partial_ = std::move(o.partial_);
    in_fragment_ = o.in_fragment_;
    queue_ = std::move(o.queue_);
    mask_state_ = o.mask_state_;
    o.fd_ = -1;
  }
  return *this;
}

WsSocket::~WsSocket() {
  if (fd_ >= 0) ::close(fd_);
}

WsSocket WsSocket::accept_upgrade(int fd, int timeout_ms) {
  WsSocket s(fd, false);
  std::string rest;
  const std::string head = read_http_head(fd, timeout_ms, rest);
  const std::string key = header(head, "Sec-WebSocket-Key");
  if (head.rfind("GET ", 0) != 0 || key.empty() || !contains_token(header(head, "Upgrade"), "websocket") ||
      !contains_token(header(head, "Connection"), "upgrade")) {
    try {
      write_all(fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
    } catch (const WsProtocolError&) {
    }
    throw WsProtocolError("handshake: not a websocket upgrade");
  }
  write_all(fd, "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Accept: " +
                    ws_accept_key(key) + "\r\n\r\n");
  s.inbuf_ = rest;
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

WsSocket WsSocket::connect(const std::string& host, int port, const std::string& path, int timeout_ms) {
  addrinfo hints{}, *res = nullptr;
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw WsProtocolError("connect: cannot resolve " + host);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    ::freeaddrinfo(res);
    if (fd >= 0) ::close(fd);
    throw WsProtocolError("connect: " + std::string(std::strerror(errno)));
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  WsSocket s(fd, true);
  std::random_device rd;
  unsigned char raw[16];
  for (auto& b : raw) b = static_cast<unsigned char>(rd());
  const std::string key = base64(raw, sizeof raw);
  write_all(fd, "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                    "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                    "\r\nSec-WebSocket-Version: 13\r\n\r\n");
  std::string rest;
  const std::string head = read_http_head(fd, timeout_ms, rest);
  if (head.rfind("HTTP/1.1 101", 0) != 0 || header(head, "Sec-WebSocket-Accept") != ws_accept_key(key))
    throw WsProtocolError("handshake: server refused the upgrade");
  s.inbuf_ = rest;
  s.mask_state_ = rd();
  return s;
}

void WsSocket::send_frame(WsOpcode op, const std::string& payload) {
  if (fd_ < 0 || closed_) throw WsProtocolError("send on closed socket");
  std::optional<std::array<std::uint8_t, 4>> mask;
  if (client_) {
    mask_state_ = mask_state_ * 1664525u + 1013904223u;
    mask = std::array<std::uint8_t, 4>{static_cast<std::uint8_t>(mask_state_), static_cast<std::uint8_t>(mask_state_ >> 8),
                                       static_cast<std::uint8_t>(mask_state_ >> 16), static_cast<std::uint8_t>(mask_state_ >> 24)};
  }
  write_all(fd_, ws_encode(op, payload, mask));
}

void WsSocket::send_text(const std::string& text) { send_frame(WsOpcode::Text, text); }

bool WsSocket::read_some(int timeout_ms) {
  pollfd p{fd_, POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r <= 0) return true;
  char tmp[65536];
  const ssize_t n = ::recv(fd_, tmp, sizeof tmp, MSG_DONTWAIT);
  if (n == 0) {
    closed_ = true;
    return false;
  }
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return true;
    closed_ = true;
    return false;
  }
  inbuf_.append(tmp, static_cast<std::size_t>(n));
  return true;
}

bool WsSocket::process_frames() {
  while (auto f = ws_decode(inbuf_)) {
    if (!client_ && !f->masked) throw WsProtocolError("unmasked client frame");
    switch (f->opcode) {
      case WsOpcode::Ping: send_frame(WsOpcode::Pong, f->payload); break;
      case WsOpcode::Pong: break;
      case WsOpcode::Close:
        if (!closed_) {
          try {
            send_frame(WsOpcode::Close, f->payload.substr(0, 2));
          } catch (const WsProtocolError&) {
          }
        }
        closed_ = true;
        return false;
      case WsOpcode::Text:
      case WsOpcode::Binary:
        if (in_fragment_) throw WsProtocolError("new message inside a fragmented one");
        if (f->fin) queue_.push_back(std::move(f->payload));
        else {
          partial_ = std::move(f->payload);
          in_fragment_ = true;
        }
        break;
      case WsOpcode::Continuation:
        if (!in_fragment_) throw WsProtocolError("continuation without a start frame");
        partial_ += f->payload;
        if (f->fin) {
          queue_.push_back(std::move(partial_));
          partial_.clear();
          in_fragment_ = false;
        }
        break;
    }
  }
  return true;
}

bool WsSocket::pump() {
  if (!is_open()) return false;
  if (!read_some(0)) return false;
  return process_frames();
}

std::optional<std::string> WsSocket::pop_message() {
  if (queue_.empty()) return std::nullopt;
  std::string m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::optional<std::string> WsSocket::recv_text(int timeout_ms) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms < 0 ? 0 : timeout_ms);
  for (;;) {
    if (!process_frames()) return pop_message();
    if (auto m = pop_message()) return m;
    if (closed_) return std::nullopt;
    int wait = -1;
    if (timeout_ms >= 0) {
      wait = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count());
      if (wait <= 0) return std::nullopt;
    }
    if (!read_some(wait)) return pop_message();
  }
}

void WsSocket::close() {
  if (fd_ < 0) return;
  if (!closed_) {
    try {
      send_frame(WsOpcode::Close, std::string("\x03\xe8", 2));
    } catch (const WsProtocolError&) {
    }
  }
  closed_ = true;
  ::close(fd_);
  fd_ = -1;
}

}  // namespace camarm
