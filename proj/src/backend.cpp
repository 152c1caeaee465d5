#include "refcam/backend.hpp"

#include <cmath>

#include "refcam/errors.hpp"

namespace refcam {

std::string_view to_string(MaskMode mode) {
  return mode == MaskMode::Feature ? "feature" : "image";
}

MaskMode mask_mode_from_string(std::string_view text) {
  if (text == "feature") return MaskMode::Feature;
  if (text == "image") return MaskMode::Image;
  throw ConfigError("mask mode must be 'feature' or 'image', got '" + std::string(text) + "'");
}

void validate_response(const BackendRequest& request, const BackendResponse& response) {
  auto fail = [](const std::string& what) { throw InvariantViolationError(what); };
  const auto& a = response.attention;
  const auto& g = response.gradients;
  if (!a.same_shape(g)) fail("attention and gradient tensors differ in shape");
  if (a.tokens() != request.tokens.size()) fail("response row count differs from token count");
  if (a.height() != response.latent.height || a.width() != response.latent.width) {
    fail("tensor planes do not match the advertised latent grid");
  }
  const auto& mask = request.attention_mask;
  if (mask.height() != a.height() || mask.width() != a.width()) {
    fail("attention mask does not match the latent grid");
  }
  if (!std::isfinite(response.itm) || response.itm < 0.0 || response.itm > 1.0) {
    fail("itm outside [0, 1]");
  }
  for (std::size_t k = 0; k < a.tokens(); ++k) {
    const auto row = a.row(k);
    const auto grad = g.row(k);
    double mass = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!std::isfinite(row[i]) || !std::isfinite(grad[i])) fail("non-finite tensor value");
      if (row[i] < 0.0) fail("negative attention in row " + std::to_string(k));
      if (request.mask_mode == MaskMode::Feature && mask[i] == 0 &&
          (row[i] != 0.0 || grad[i] != 0.0)) {
        fail("non-zero attention or gradient at a masked cell in row " + std::to_string(k));
      }
      if (mask[i] != 0 || request.mask_mode == MaskMode::Image) mass += row[i];
    }
    if (mass > 1.0 + kAttentionMassTolerance) {
      fail("attention row " + std::to_string(k) + " sums above 1");
    }
  }
}

}  // namespace refcam
