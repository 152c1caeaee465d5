#include "refcam/emphasis.hpp"

#include <algorithm>
#include <cmath>

#include "refcam/errors.hpp"

namespace refcam {

namespace {

std::vector<double> gradcam_row(const TokenSaliencyStack& stack, std::size_t row) {
  const auto a = stack.attention.row(row);
  const auto g = stack.gradients_raw.row(row);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * std::max(g[i], 0.0);
  return out;
}

}  // namespace

std::size_t TokenSaliencyStack::row_of(std::size_t token_index) const {
  if (token_index >= token_map.size()) {
    throw InputError("token index " + std::to_string(token_index) + " has no saliency row");
  }
  return token_map[token_index];
}

void TokenSaliencyStack::validate() const {
  if (!attention.same_shape(gradients_raw)) {
    throw ShapeError("attention and gradient stacks differ in shape");
  }
  for (std::size_t row : token_map) {
    if (row >= attention.tokens()) throw ShapeError("token map points past the last stack row");
  }
  for (double a : attention.values()) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("attention must be finite and >= 0");
  }
}

Tensor3 local_augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed,
                      double epsilon) {
  stack.validate();
  if (parsed.context.empty()) {
    throw DegenerateInputError("local augmentation needs at least one context token");
  }
  const std::size_t main_row = stack.row_of(parsed.primary);
  const auto a_main = stack.attention.row(main_row);
  const auto g_main = stack.gradients_raw.row(main_row);
  const auto h_main = gradcam_row(stack, main_row);

  Tensor3 out(0, stack.attention.height(), stack.attention.width());
  std::vector<double> diff(a_main.size());
  for (std::size_t ctx : parsed.context) {
    const auto a_ctx = stack.attention.row(stack.row_of(ctx));
    double energy = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] = a_main[i] - a_ctx[i];
      energy += diff[i] * diff[i];
    }
    const double norm = std::max(std::sqrt(energy), epsilon);
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] = diff[i] / norm * std::max(g_main[i], 0.0) * h_main[i];
    }
    out.push_row(diff);
  }
  return out;
}

Tensor3 global_augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed) {
  stack.validate();
  if (parsed.effective.empty()) throw InputError("effective token set is empty");
  Tensor3 out(0, stack.attention.height(), stack.attention.width());
  for (std::size_t idx : parsed.effective) out.push_row(gradcam_row(stack, stack.row_of(idx)));
  const auto main = gradcam_row(stack, stack.row_of(parsed.primary));
  for (std::size_t i = 0; i < parsed.context.size(); ++i) out.push_row(main);
  return out;
}

Heatmap aggregate(const Tensor3& local, const Tensor3& global) {
  const std::size_t rows = local.tokens() + global.tokens();
  if (rows == 0) throw InputError("nothing to aggregate: both stacks are empty");
  if (local.tokens() > 0 && global.tokens() > 0 &&
      (local.height() != global.height() || local.width() != global.width())) {
    throw ShapeError("local and global stacks differ in map size");
  }
  const Tensor3& shape = global.tokens() > 0 ? global : local;
  Heatmap out(shape.height(), shape.width());
  std::vector<double> cell(rows);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < global.tokens(); ++k) cell[r++] = global.row(k)[i];
    for (std::size_t k = 0; k < local.tokens(); ++k) cell[r++] = local.row(k)[i];
    std::ranges::sort(cell);
    double sum = 0.0;
    for (double v : cell) sum += v;
    out[i] = sum / static_cast<double>(rows);
  }
  return out;
}

AugmentedGradcam augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed,
                         double epsilon) {
  AugmentedGradcam out;
  out.global = global_augment(stack, parsed);
  out.local = parsed.context.empty()
                  ? Tensor3(0, stack.attention.height(), stack.attention.width())
                  : local_augment(stack, parsed, epsilon);
  out.combined = aggregate(out.local, out.global);
  return out;
}

}  // namespace refcam
