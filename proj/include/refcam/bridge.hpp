#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refcam/backend.hpp"

namespace refcam {

// Bridge protocol: one JSON object per newline-terminated frame.
//   client -> {"type":"hello","version":1}
//   server -> {"type":"hello","version":1,"latent":[h,w],"capabilities":[...]}
//   client -> {"type":"forward","image":...,"tokens":[...],
//              "mask":{"h":H,"w":W,"bits":<base64>},"mask_mode":"feature"|"image"}
//   server -> {"type":"result",...} | {"type":"error","message":...}

inline constexpr int kBridgeProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultBridgeTimeout{120'000};
inline constexpr std::size_t kMaxFrameBytes = std::size_t{256} << 20;

/// Row-major bits, most significant bit first within each byte.
std::vector<std::uint8_t> pack_mask_bits(const Mask& mask);
Mask unpack_mask_bits(std::span<const std::uint8_t> bytes, std::size_t height, std::size_t width);

struct HelloReply {
  int version = kBridgeProtocolVersion;
  LatentShape latent;
  std::vector<std::string> capabilities;
};

nlohmann::json encode_hello();
nlohmann::json encode_hello_reply(const HelloReply& reply);
HelloReply decode_hello_reply(const nlohmann::json& frame);

nlohmann::json encode_forward_request(const BackendRequest& request);
BackendRequest decode_forward_request(const nlohmann::json& frame);

nlohmann::json encode_result(const BackendResponse& response);
/// Parses a result frame. Error frames raise RemoteError; anything structurally
/// wrong raises MalformedFrameError.
BackendResponse decode_result(const nlohmann::json& frame);

nlohmann::json encode_error(std::string_view message);

/// Newline-framed duplex byte stream over a pair of file descriptors.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd, bool owns_fds);
  ~LineChannel();
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  void send(std::string_view frame);
  /// Next frame without its newline. EOF before any byte -> TransportError,
  /// EOF inside a frame -> MalformedFrameError, no frame in time -> TimeoutError.
  std::string receive(std::chrono::milliseconds timeout);

 private:
  int read_fd_;
  int write_fd_;
  bool owns_fds_;
  std::string buffer_;
};

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port);
std::unique_ptr<LineChannel> stdio_channel();

/// One request, one response, validated before it is returned.
BackendResponse bridge_forward(LineChannel& channel, const BackendRequest& request,
                               std::chrono::milliseconds timeout = kDefaultBridgeTimeout);

/// Client side of the bridge. Performs the handshake on construction; one
/// request in flight at a time.
class BridgeBackend : public Backend {
 public:
  explicit BridgeBackend(std::unique_ptr<LineChannel> channel,
                         std::chrono::milliseconds timeout = kDefaultBridgeTimeout);

  /// endpoint is "HOST:PORT" or "stdio".
  static std::unique_ptr<BridgeBackend> connect(std::string_view endpoint,
                                                std::chrono::milliseconds timeout =
                                                    kDefaultBridgeTimeout);

  LatentShape latent_shape(const std::string& image) override;
  BackendResponse forward(const BackendRequest& request) override;

  const HelloReply& hello() const { return hello_; }

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  HelloReply hello_;
};

}  // namespace refcam
