#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "refcam/grid.hpp"

namespace testing_support {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed1234u);
  return engine;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline std::size_t pick(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng());
}

inline std::vector<double> random_values(std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(lo, hi);
  return v;
}

inline refcam::Heatmap random_heatmap(std::size_t h, std::size_t w, double lo = 0.0, double hi = 1.0) {
  return refcam::Heatmap(h, w, random_values(h * w, lo, hi));
}

inline refcam::Mask random_mask(std::size_t h, std::size_t w, double density) {
  refcam::Mask m(h, w);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = uniform(0.0, 1.0) < density ? 1 : 0;
  return m;
}

inline refcam::Tensor3 random_tensor(std::size_t t, std::size_t h, std::size_t w, double lo, double hi) {
  return refcam::Tensor3(t, h, w, random_values(t * h * w, lo, hi));
}

}  // namespace testing_support
