#pragma once

#include <vector>

#include "refcam/expression.hpp"
#include "refcam/grid.hpp"

namespace refcam {

/// Backend output for one query, plus where each parsed token landed in it.
struct TokenSaliencyStack {
  Tensor3 attention;
  Tensor3 gradients_raw;  // signed; clamped here, not by the backend
  std::vector<std::size_t> token_map;  // parsed token index -> stack row

  std::size_t row_of(std::size_t token_index) const;
  void validate() const;
};

inline constexpr double kDifferenceEpsilon = 1e-8;

/// One contrast-modulated copy of the primary word's Grad-CAM per context token:
///   D_c = (A_m - A_c) / max(||A_m - A_c||_2, eps),  slot_c = D_c * G_m+ * H_m.
/// Throws DegenerateInputError when there are no context tokens.
Tensor3 local_augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed,
                      double epsilon = kDifferenceEpsilon);

/// Grad-CAM rows for every effective token, followed by the primary word's row
/// repeated once per context token.
Tensor3 global_augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed);

/// Mean over the concatenation [global rows, local rows]. Per-cell sums run in
/// sorted order, so the result does not depend on row order.
Heatmap aggregate(const Tensor3& local, const Tensor3& global);

struct AugmentedGradcam {
  Tensor3 local;   // zero rows when there is no context
  Tensor3 global;
  Heatmap combined;
};

AugmentedGradcam augment(const TokenSaliencyStack& stack, const ParsedExpression& parsed,
                         double epsilon = kDifferenceEpsilon);

}  // namespace refcam
