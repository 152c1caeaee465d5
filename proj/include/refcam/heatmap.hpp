#pragma once

#include <vector>

#include "refcam/grid.hpp"

namespace refcam {

inline constexpr double kDefaultTieEpsilon = 1e-9;

/// Grad-CAM per token: attention times the positive part of the raw gradient.
Tensor3 compose_gradcam(const Tensor3& attention, const Tensor3& gradients_raw);

/// Averages a token stack into one map. Throws InputError on an empty stack.
Heatmap mean_over_tokens(const Tensor3& stack);

/// Logistic applied after subtracting the map mean, so only above-mean cells land above 0.5.
Heatmap center_sigmoid(const Heatmap& map);

/// 0 where center_sigmoid(map) >= theta, 1 elsewhere. theta must lie in (0, 1).
Mask threshold_drop_mask(const Heatmap& map, double theta);

/// Corner-aligned bilinear resize to width x height pixels.
Heatmap bilinear_upsample(const Heatmap& map, std::size_t width, std::size_t height);

/// All cells within tie_epsilon of the maximum, in row-major order.
std::vector<Coord> argmax_coords(const Heatmap& map, double tie_epsilon = kDefaultTieEpsilon);

}  // namespace refcam
