#include "refcam/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace refcam {

namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double map_mean(const Heatmap& map) {
  const auto values = map.values();
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

Tensor3 compose_gradcam(const Tensor3& attention, const Tensor3& gradients_raw) {
  if (!attention.same_shape(gradients_raw)) {
    throw ShapeError("attention and gradient stacks differ in shape");
  }
  Tensor3 out(attention.tokens(), attention.height(), attention.width());
  std::ranges::transform(attention.values(), gradients_raw.values(), out.values().begin(),
                         [](double a, double g) { return a * std::max(g, 0.0); });
  return out;
}

Heatmap mean_over_tokens(const Tensor3& stack) {
  if (stack.tokens() == 0 || stack.plane() == 0) {
    throw InputError("cannot average an empty token stack");
  }
  Heatmap out(stack.height(), stack.width());
  auto acc = out.values();
  for (std::size_t k = 0; k < stack.tokens(); ++k) {
    const auto row = stack.row(k);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += row[i];
  }
  const double n = static_cast<double>(stack.tokens());
  for (double& v : acc) v /= n;
  return out;
}

Heatmap center_sigmoid(const Heatmap& map) {
  Heatmap out(map.height(), map.width());
  if (map.empty()) return out;
  const double mean = map_mean(map);
  std::ranges::transform(map.values(), out.values().begin(),
                         [mean](double v) { return logistic(v - mean); });
  return out;
}

Mask threshold_drop_mask(const Heatmap& map, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ConfigError("binarization threshold must lie in (0, 1)");
  }
  const Heatmap scaled = center_sigmoid(map);
  Mask out(map.height(), map.width());
  std::ranges::transform(scaled.values(), out.values().begin(),
                         [theta](double s) -> std::uint8_t { return s >= theta ? 0 : 1; });
  return out;
}

Heatmap bilinear_upsample(const Heatmap& map, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw ConfigError("upsample target must be at least 1x1");
  if (map.empty()) throw InputError("cannot upsample an empty map");
  const std::size_t in_h = map.height();
  const std::size_t in_w = map.width();
  // Corner-aligned: output index 0 and n-1 land exactly on input index 0 and m-1.
  auto source = [](std::size_t out_index, std::size_t out_n, std::size_t in_n) {
    if (out_n == 1 || in_n == 1) return 0.0;
    return static_cast<double>(out_index) * static_cast<double>(in_n - 1) /
           static_cast<double>(out_n - 1);
  };

  Heatmap out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = source(y, height, in_h);
    const auto y0 = std::min(static_cast<std::size_t>(sy), in_h - 1);
    const std::size_t y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = source(x, width, in_w);
      const auto x0 = std::min(static_cast<std::size_t>(sx), in_w - 1);
      const std::size_t x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = map(y0, x0) + fx * (map(y0, x1) - map(y0, x0));
      const double bottom = map(y1, x0) + fx * (map(y1, x1) - map(y1, x0));
      double v = top + fy * (bottom - top);
      // Rounding in the lerp can step past the corner values; keep the hull property exact.
      const double lo = std::min({map(y0, x0), map(y0, x1), map(y1, x0), map(y1, x1)});
      const double hi = std::max({map(y0, x0), map(y0, x1), map(y1, x0), map(y1, x1)});
      out(y, x) = std::clamp(v, lo, hi);
    }
  }
  return out;
}

std::vector<Coord> argmax_coords(const Heatmap& map, double tie_epsilon) {
  if (map.empty()) throw InputError("argmax of an empty map");
  if (tie_epsilon < 0.0) throw ConfigError("tie epsilon must be non-negative");
  const double peak = *std::ranges::max_element(map.values());
  std::vector<Coord> out;
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      if (map(y, x) >= peak - tie_epsilon) out.push_back({x, y});
    }
  }
  return out;
}

}  // namespace refcam
