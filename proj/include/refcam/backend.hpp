#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "refcam/grid.hpp"

namespace refcam {

/// Where the attention mask is applied: on the cross-attention key/value grid,
/// or on image pixels before encoding.
enum class MaskMode { Feature, Image };

std::string_view to_string(MaskMode mode);
MaskMode mask_mode_from_string(std::string_view text);

struct LatentShape {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

struct BackendRequest {
  std::string image;
  std::vector<std::string> tokens;  // prompt-prefixed, sentinel first
  Mask attention_mask;              // latent grid, 1 = visible
  MaskMode mask_mode = MaskMode::Feature;
};

struct BackendResponse {
  Tensor3 attention;  // one head-reduced row per request token
  Tensor3 gradients;  // d(ITM)/d(attention), unclamped
  double itm = 0.0;
  LatentShape latent;
  std::size_t image_width = 0;
  std::size_t image_height = 0;

  friend bool operator==(const BackendResponse&, const BackendResponse&) = default;
};

/// Slack allowed on per-row attention mass.
inline constexpr double kAttentionMassTolerance = 1e-4;

/// Checks a response against its request: shapes, finiteness, non-negative
/// attention with row mass <= 1 + tolerance, itm in [0, 1], and in feature
/// mode exact zeros at masked cells. Throws InvariantViolationError.
void validate_response(const BackendRequest& request, const BackendResponse& response);

/// A cross-attention model that answers one masked image-text query at a time.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual LatentShape latent_shape(const std::string& image) = 0;
  virtual BackendResponse forward(const BackendRequest& request) = 0;
};

}  // namespace refcam
