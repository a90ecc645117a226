#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace camarm {

class WsProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// base64(SHA-1(key + GUID)).
std::string ws_accept_key(const std::string& client_key);

enum class WsOpcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

struct WsFrame {
  bool fin = true;
  WsOpcode opcode = WsOpcode::Text;
  bool masked = false;
  std::string payload;
};

// Client frames must be masked, server frames must not be.
std::string ws_encode(WsOpcode op, const std::string& payload, const std::optional<std::array<std::uint8_t, 4>>& mask = {});

// Pops one complete frame from the front of `buf`; nullopt when more bytes
// are needed. Throws WsProtocolError on reserved bits, bad opcodes, oversized
// or fragmented control frames.
std::optional<WsFrame> ws_decode(std::string& buf, std::size_t max_payload = std::size_t{1} << 24);

// Blocking-connect / poll-driven socket speaking RFC 6455 text messages.
class WsSocket {
 public:
  WsSocket() = default;
  WsSocket(const WsSocket&) = delete;
  WsSocket& operator=(const WsSocket&) = delete;
  WsSocket(WsSocket&& o) noexcept;
  WsSocket& operator=(WsSocket&& o) noexcept;
  ~WsSocket();

  // Server side: reads the HTTP upgrade request from an accepted fd and
  // answers 101. Throws WsProtocolError (after a 400 reply) on a bad request.
  static WsSocket accept_upgrade(int fd, int timeout_ms = 2000);
  // Client side: TCP connect plus handshake; verifies Sec-WebSocket-Accept.
  static WsSocket connect(const std::string& host, int port, const std::string& path = "/", int timeout_ms = 2000);

  void send_text(const std::string& text);
  // Next text message within timeout_ms (-1 waits forever). Answers pings,
  // reassembles fragments, returns nullopt on timeout or close.
  std::optional<std::string> recv_text(int timeout_ms);
  // Non-blocking: reads what the kernel has and queues complete messages.
  // Returns false once the peer is gone.
  bool pump();
  std::optional<std::string> pop_message();

  void close();
  bool is_open() const { return fd_ >= 0 && !closed_; }
  int fd() const { return fd_; }

 private:
  explicit WsSocket(int fd, bool client) : fd_(fd), client_(client) {}
  bool read_some(int timeout_ms);
  void send_frame(WsOpcode op, const std::string& payload);
  bool process_frames();

  int fd_ = -1;
  bool client_ = false;
  bool closed_ = false;
  std::string inbuf_;
  std::string partial_;
  bool in_fragment_ = false;
  std::deque<std::string> queue_;
  std::uint32_t mask_state_ = 0x9e3779b9u;
};

}  // namespace camarm
