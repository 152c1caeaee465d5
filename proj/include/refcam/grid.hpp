#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "refcam/errors.hpp"

namespace refcam {

/// Dense row-major 2-D array. Row index is y (height), column index is x (width).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), values_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height_ * width_) {
      throw ShapeError("grid value count does not match height*width");
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
  const T& operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

/// Real-valued map: latent-grid Grad-CAMs (Heatmap2) and image-resolution maps alike.
using Heatmap = Grid<double>;

/// 0/1 mask. Used both for latent attention masks and image-resolution instance masks.
using Mask = Grid<std::uint8_t>;

struct Coord {
  std::size_t x = 0;
  std::size_t y = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

/// Stack of per-token maps, token-major then row-major.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t tokens, std::size_t height, std::size_t width, double fill = 0.0)
      : tokens_(tokens), height_(height), width_(width), values_(tokens * height * width, fill) {}
  Tensor3(std::size_t tokens, std::size_t height, std::size_t width, std::vector<double> values)
      : tokens_(tokens), height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != tokens_ * height_ * width_) {
      throw ShapeError("tensor value count does not match tokens*height*width");
    }
  }

  std::size_t tokens() const { return tokens_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane() const { return height_ * width_; }

  double& operator()(std::size_t k, std::size_t y, std::size_t x) {
    return values_[(k * height_ + y) * width_ + x];
  }
  double operator()(std::size_t k, std::size_t y, std::size_t x) const {
    return values_[(k * height_ + y) * width_ + x];
  }

  std::span<double> row(std::size_t k) { return {values_.data() + k * plane(), plane()}; }
  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * plane(), plane()};
  }
  Heatmap row_map(std::size_t k) const {
    auto r = row(k);
    return Heatmap(height_, width_, std::vector<double>(r.begin(), r.end()));
  }

  /// Appends one token plane of height*width values.
  void push_row(std::span<const double> plane_values);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const Tensor3& other) const {
    return tokens_ == other.tokens_ && height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Tensor3& a, const Tensor3& b) = default;

 private:
  std::size_t tokens_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

inline void Tensor3::push_row(std::span<const double> plane_values) {
  if (plane_values.size() != plane()) {
    throw ShapeError("pushed row does not match tensor plane size");
  }
  values_.insert(values_.end(), plane_values.begin(), plane_values.end());
  ++tokens_;
}

}  // namespace refcam
