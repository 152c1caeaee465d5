#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "refcam/grid.hpp"

namespace refcam {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Binary PPM (P6, maxval 255).
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_ppm(const std::filesystem::path& path);

/// 16-bit binary PGM; values in [0, 1] are quantized to 0..65535.
void write_pgm16(const std::filesystem::path& path, const Heatmap& map);
Heatmap read_pgm16(const std::filesystem::path& path);

inline constexpr std::uint8_t kBlankGray = 128;

/// Heat as a red alpha blend over the base (mid-gray when absent); the mask
/// outline drawn in green. Pixels are byte-deterministic for fixed inputs.
RgbImage render_overlay(const std::optional<RgbImage>& base, const Heatmap& heat, const Mask& mask);

}  // namespace refcam
