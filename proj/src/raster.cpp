#include "refcam/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "refcam/errors.hpp"

namespace refcam {

namespace {

// Netpbm header: magic, width, height, maxval separated by whitespace/comments.
struct PnmHeader {
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t maxval = 0;
};

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  PnmHeader h;
  auto next_token = [&]() {
    std::string token;
    for (;;) {
      const int c = in.get();
      if (c == EOF) break;
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      if (std::isspace(c)) {
        if (!token.empty()) break;
        continue;
      }
      token.push_back(static_cast<char>(c));
    }
    return token;
  };
  h.magic = next_token();
  try {
    h.width = std::stoul(next_token());
    h.height = std::stoul(next_token());
    h.maxval = std::stoul(next_token());
  } catch (const std::exception&) {
    throw InputError("bad netpbm header in " + path.string());
  }
  return h;
}

std::vector<std::uint8_t> read_body(std::istream& in, std::size_t count,
                                    const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(count);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw InputError("truncated image data in " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& header,
                const std::vector<std::uint8_t>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << header;
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

bool on_outline(const Mask& mask, std::size_t y, std::size_t x) {
  if (mask(y, x) == 0) return false;
  if (y == 0 || x == 0 || y + 1 == mask.height() || x + 1 == mask.width()) return true;
  return mask(y - 1, x) == 0 || mask(y + 1, x) == 0 || mask(y, x - 1) == 0 || mask(y, x + 1) == 0;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  if (image.pixels.size() != image.width * image.height * 3) {
    throw ShapeError("RGB buffer does not match its dimensions");
  }
  write_file(path,
             "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n",
             image.pixels);
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const auto h = read_header(in, path);
  if (h.magic != "P6" || h.maxval != 255) throw InputError(path.string() + ": expected 8-bit P6");
  return {h.width, h.height, read_body(in, h.width * h.height * 3, path)};
}

void write_pgm16(const std::filesystem::path& path, const Heatmap& map) {
  std::vector<std::uint8_t> body;
  body.reserve(map.size() * 2);
  for (double v : map.values()) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    body.push_back(static_cast<std::uint8_t>(q >> 8));  // netpbm is big-endian
    body.push_back(static_cast<std::uint8_t>(q & 0xFF));
  }
  write_file(path,
             "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n65535\n",
             body);
}

Heatmap read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const auto h = read_header(in, path);
  if (h.magic != "P5" || h.maxval != 65535) throw InputError(path.string() + ": expected 16-bit P5");
  const auto body = read_body(in, h.width * h.height * 2, path);
  Heatmap map(h.height, h.width);
  for (std::size_t i = 0; i < map.size(); ++i) {
    map[i] = static_cast<double>((body[2 * i] << 8) | body[2 * i + 1]) / 65535.0;
  }
  return map;
}

RgbImage render_overlay(const std::optional<RgbImage>& base, const Heatmap& heat, const Mask& mask) {
  if (heat.height() != mask.height() || heat.width() != mask.width()) {
    throw ShapeError("overlay heatmap and mask differ in size");
  }
  RgbImage out{heat.width(), heat.height(), {}};
  if (base) {
    if (base->width != out.width || base->height != out.height) {
      throw ShapeError("overlay base image differs in size from the heatmap");
    }
    out.pixels = base->pixels;
  } else {
    out.pixels.assign(out.width * out.height * 3, kBlankGray);
  }
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      std::uint8_t* px = &out.pixels[(y * out.width + x) * 3];
      if (on_outline(mask, y, x)) {
        px[0] = 0;
        px[1] = 255;
        px[2] = 0;
        continue;
      }
      const double alpha = std::clamp(heat(y, x), 0.0, 1.0);
      const double red[3] = {255.0, 0.0, 0.0};
      for (int c = 0; c < 3; ++c) {
        px[c] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * px[c] + alpha * red[c]));
      }
    }
  }
  return out;
}

}  // namespace refcam
