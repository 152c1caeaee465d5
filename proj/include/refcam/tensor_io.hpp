#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "refcam/grid.hpp"

namespace refcam {

// Tensor dump layout: "IRPE", version 0x01, u32 LE tokens, h, w, then f32 LE values
// token-major, row-major.
inline constexpr std::uint8_t kTensorDumpVersion = 0x01;

std::vector<std::uint8_t> encode_tensor_dump(const Tensor3& tensor);
Tensor3 decode_tensor_dump(std::span<const std::uint8_t> bytes);

void write_tensor_dump(const std::filesystem::path& path, const Tensor3& tensor);
Tensor3 read_tensor_dump(const std::filesystem::path& path);

/// Little-endian f32 packing shared with the bridge wire format.
std::vector<std::uint8_t> pack_f32_le(std::span<const double> values);
std::vector<double> unpack_f32_le(std::span<const std::uint8_t> bytes);

}  // namespace refcam
