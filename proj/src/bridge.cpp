#include "refcam/bridge.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "refcam/base64.hpp"
#include "refcam/errors.hpp"
#include "refcam/tensor_io.hpp"

namespace refcam {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { throw MalformedFrameError(what); }

json encode_tensor(const Tensor3& t) {
  const auto bytes = pack_f32_le(t.values());
  return {{"shape", {t.tokens(), t.height(), t.width()}}, {"data", base64_encode(bytes)}};
}

Tensor3 decode_tensor(const json& j) {
  const auto& shape = j.at("shape");
  if (!shape.is_array() || shape.size() != 3) malformed("tensor shape must have three entries");
  const auto tokens = shape.at(0).get<std::size_t>();
  const auto height = shape.at(1).get<std::size_t>();
  const auto width = shape.at(2).get<std::size_t>();
  std::vector<std::uint8_t> bytes;
  try {
    bytes = base64_decode(j.at("data").get<std::string>());
  } catch (const InputError& e) {
    malformed(std::string("tensor data: ") + e.what());
  }
  if (bytes.size() != 4 * tokens * height * width) {
    malformed("tensor data length does not match its shape");
  }
  return Tensor3(tokens, height, width, unpack_f32_le(bytes));
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

std::vector<std::uint8_t> pack_mask_bits(const Mask& mask) {
  std::vector<std::uint8_t> out((mask.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

Mask unpack_mask_bits(std::span<const std::uint8_t> bytes, std::size_t height, std::size_t width) {
  Mask mask(height, width);
  if (bytes.size() != (mask.size() + 7) / 8) {
    throw InputError("packed mask length does not match its dimensions");
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = (bytes[i / 8] & (0x80u >> (i % 8))) != 0 ? 1 : 0;
  }
  return mask;
}

json encode_hello() { return {{"type", "hello"}, {"version", kBridgeProtocolVersion}}; }

json encode_hello_reply(const HelloReply& reply) {
  return {{"type", "hello"},
          {"version", reply.version},
          {"latent", {reply.latent.height, reply.latent.width}},
          {"capabilities", reply.capabilities}};
}

HelloReply decode_hello_reply(const json& frame) {
  try {
    const auto type = frame.at("type").get<std::string>();
    if (type == "error") throw RemoteError(frame.value("message", std::string("handshake refused")));
    if (type != "hello") malformed("expected a hello reply, got '" + type + "'");
    HelloReply reply;
    reply.version = frame.at("version").get<int>();
    if (reply.version != kBridgeProtocolVersion) {
      throw TransportError("unsupported bridge protocol version " + std::to_string(reply.version));
    }
    reply.latent = {frame.at("latent").at(0).get<std::size_t>(),
                    frame.at("latent").at(1).get<std::size_t>()};
    reply.capabilities = frame.value("capabilities", std::vector<std::string>{});
    return reply;
  } catch (const json::exception& e) {
    malformed(std::string("hello reply: ") + e.what());
  }
}

json encode_forward_request(const BackendRequest& request) {
  const auto& mask = request.attention_mask;
  return {{"type", "forward"},
          {"image", request.image},
          {"tokens", request.tokens},
          {"mask",
           {{"h", mask.height()}, {"w", mask.width()}, {"bits", base64_encode(pack_mask_bits(mask))}}},
          {"mask_mode", std::string(to_string(request.mask_mode))}};
}

BackendRequest decode_forward_request(const json& frame) {
  try {
    if (frame.at("type").get<std::string>() != "forward") malformed("expected a forward frame");
    BackendRequest request;
    request.image = frame.at("image").get<std::string>();
    request.tokens = frame.at("tokens").get<std::vector<std::string>>();
    const auto& m = frame.at("mask");
    request.attention_mask = unpack_mask_bits(base64_decode(m.at("bits").get<std::string>()),
                                              m.at("h").get<std::size_t>(),
                                              m.at("w").get<std::size_t>());
    request.mask_mode = mask_mode_from_string(frame.at("mask_mode").get<std::string>());
    return request;
  } catch (const json::exception& e) {
    malformed(std::string("forward frame: ") + e.what());
  } catch (const InputError& e) {
    malformed(std::string("forward frame: ") + e.what());
  } catch (const ConfigError& e) {
    malformed(std::string("forward frame: ") + e.what());
  }
}

json encode_result(const BackendResponse& response) {
  return {{"type", "result"},
          {"latent", {response.latent.height, response.latent.width}},
          {"image_size", {response.image_width, response.image_height}},
          {"itm", response.itm},
          {"attention", encode_tensor(response.attention)},
          {"gradients", encode_tensor(response.gradients)}};
}

BackendResponse decode_result(const json& frame) {
  try {
    const auto type = frame.at("type").get<std::string>();
    if (type == "error") throw RemoteError(frame.value("message", std::string("unspecified")));
    if (type != "result") malformed("expected a result frame, got '" + type + "'");
    BackendResponse response;
    response.latent = {frame.at("latent").at(0).get<std::size_t>(),
                       frame.at("latent").at(1).get<std::size_t>()};
    response.image_width = frame.at("image_size").at(0).get<std::size_t>();
    response.image_height = frame.at("image_size").at(1).get<std::size_t>();
    response.itm = frame.at("itm").get<double>();
    response.attention = decode_tensor(frame.at("attention"));
    response.gradients = decode_tensor(frame.at("gradients"));
    return response;
  } catch (const json::exception& e) {
    malformed(std::string("result frame: ") + e.what());
  }
}

json encode_error(std::string_view message) {
  return {{"type", "error"}, {"message", std::string(message)}};
}

LineChannel::LineChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_fds_(owns_fds) {}

LineChannel::~LineChannel() {
  if (!owns_fds_) return;
  ::close(read_fd_);
  if (write_fd_ != read_fd_) ::close(write_fd_);
}

void LineChannel::send(std::string_view frame) {
  if (frame.find('\n') != std::string_view::npos) {
    throw InputError("frame payload must not contain a newline");
  }
  std::string data(frame);
  data.push_back('\n');
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("bridge write failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string LineChannel::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string frame = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return frame;
    }
    if (buffer_.size() > kMaxFrameBytes) {
      buffer_.clear();
      malformed("bridge frame exceeds the size limit");
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TimeoutError("bridge response timed out");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw TransportError("bridge poll failed: " + errno_text());
    }
    if (ready == 0) throw TimeoutError("bridge response timed out");
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("bridge read failed: " + errno_text());
    }
    if (n == 0) {
      if (buffer_.empty()) throw TransportError("bridge connection closed");
      buffer_.clear();
      malformed("bridge connection closed in the middle of a frame");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, ::freeaddrinfo);
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      return std::make_unique<LineChannel>(fd, fd, true);
    }
    ::close(fd);
  }
  throw TransportError("cannot connect to " + host + ":" + service);
}

std::unique_ptr<LineChannel> stdio_channel() {
  return std::make_unique<LineChannel>(STDIN_FILENO, STDOUT_FILENO, false);
}

BackendResponse bridge_forward(LineChannel& channel, const BackendRequest& request,
                               std::chrono::milliseconds timeout) {
  channel.send(encode_forward_request(request).dump());
  const std::string line = channel.receive(timeout);
  json frame;
  try {
    frame = json::parse(line);
  } catch (const json::exception& e) {
    malformed(std::string("response is not JSON: ") + e.what());
  }
  BackendResponse response = decode_result(frame);
  validate_response(request, response);
  return response;
}

BridgeBackend::BridgeBackend(std::unique_ptr<LineChannel> channel,
                             std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {
  channel_->send(encode_hello().dump());
  const std::string line = channel_->receive(timeout_);
  try {
    hello_ = decode_hello_reply(json::parse(line));
  } catch (const json::parse_error& e) {
    malformed(std::string("hello reply is not JSON: ") + e.what());
  }
}

std::unique_ptr<BridgeBackend> BridgeBackend::connect(std::string_view endpoint,
                                                      std::chrono::milliseconds timeout) {
  if (endpoint == "stdio") return std::make_unique<BridgeBackend>(stdio_channel(), timeout);
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw ConfigError("bridge endpoint must be HOST:PORT or stdio");
  }
  const std::string host(endpoint.substr(0, colon));
  const std::string port_text(endpoint.substr(colon + 1));
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size() || port == 0 || port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw ConfigError("invalid bridge port '" + port_text + "'");
  }
  return std::make_unique<BridgeBackend>(connect_tcp(host, static_cast<std::uint16_t>(port)),
                                         timeout);
}

LatentShape BridgeBackend::latent_shape(const std::string&) { return hello_.latent; }

BackendResponse BridgeBackend::forward(const BackendRequest& request) {
  return bridge_forward(*channel_, request, timeout_);
}

}  // namespace refcam
