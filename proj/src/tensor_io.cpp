#include "refcam/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace refcam {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'I', 'R', 'P', 'E'};
constexpr std::size_t kHeaderSize = 4 + 1 + 3 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw ShapeError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> pack_f32_le(std::span<const double> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size() * 4);
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

std::vector<double> unpack_f32_le(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) throw InputError("f32 payload length is not a multiple of 4");
  std::vector<double> out;
  out.reserve(bytes.size() / 4);
  for (std::size_t at = 0; at < bytes.size(); at += 4) {
    out.push_back(static_cast<double>(std::bit_cast<float>(get_u32(bytes, at))));
  }
  return out;
}

std::vector<std::uint8_t> encode_tensor_dump(const Tensor3& tensor) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(kTensorDumpVersion);
  put_u32(out, checked_u32(tensor.tokens(), "token count"));
  put_u32(out, checked_u32(tensor.height(), "height"));
  put_u32(out, checked_u32(tensor.width(), "width"));
  const auto payload = pack_f32_le(tensor.values());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Tensor3 decode_tensor_dump(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw InputError("tensor dump shorter than its header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw InputError("tensor dump has wrong magic bytes");
  }
  if (bytes[4] != kTensorDumpVersion) throw InputError("unsupported tensor dump version");
  const std::size_t tokens = get_u32(bytes, 5);
  const std::size_t height = get_u32(bytes, 9);
  const std::size_t width = get_u32(bytes, 13);
  const std::size_t count = tokens * height * width;
  if (bytes.size() != kHeaderSize + 4 * count) {
    throw InputError("tensor dump payload size does not match its header");
  }
  auto values = unpack_f32_le(bytes.subspan(kHeaderSize));
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("tensor dump contains a non-finite value");
  }
  return Tensor3(tokens, height, width, std::move(values));
}

void write_tensor_dump(const std::filesystem::path& path, const Tensor3& tensor) {
  const auto bytes = encode_tensor_dump(tensor);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

Tensor3 read_tensor_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open tensor dump " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor_dump(bytes);
}

}  // namespace refcam
