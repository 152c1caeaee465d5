#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "refcam/backend.hpp"
#include "refcam/emphasis.hpp"
#include "refcam/expression.hpp"
#include "refcam/grid.hpp"

namespace refcam {

struct RefinementConfig {
  double lambda = 0.8;            // weight on the previous refined map
  double theta = 0.5;             // drop threshold on the centered sigmoid
  std::size_t max_iterations = 3;
  MaskMode mask_mode = MaskMode::Feature;
  std::string prompt_prefix = "there is a";
  double difference_epsilon = kDifferenceEpsilon;

  void validate() const;
};

struct ImageRef {
  std::string id;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Everything one loop iteration produced, kept even when the iteration is rolled back.
struct IterationRecord {
  std::size_t t = 0;
  Heatmap gradcam;       // H_t from primary word emphasis
  Mask drop_mask;        // M_t
  double itm = 0.0;
  double relevance = 0.0;
  double score = 0.0;
  bool committed = false;
  Heatmap refined;       // H'_t after this iteration (unchanged from t-1 when rolled back)
  Mask cumulative_mask;  // M'_t likewise
};

struct RefinementState {
  std::size_t t = 0;        // committed iterations
  Heatmap refined;          // H'_t on the latent grid, values in [0, 1]
  Mask cumulative_mask;     // M'_t
  std::vector<double> scores;  // S of each committed iteration
  std::vector<IterationRecord> trace;
  std::size_t backend_calls = 0;
  bool stopped_by_score = false;
};

/// lambda * prev + (1 - lambda) * center_sigmoid(current).
Heatmap update_heatmap(const Heatmap& previous, const Heatmap& current, double lambda);

/// prev AND threshold_drop_mask(current, theta).
Mask update_mask(const Mask& previous, const Heatmap& current, double theta);

/// Mean of (1 - H) over an image-resolution map: how much has not been attended yet.
double relevance_score(const Heatmap& refined_previous_image);

double soft_itm(double itm, double relevance);

/// Request tokens: sentinel, prompt prefix words, then the expression words.
std::vector<std::string> build_request_tokens(const ParsedExpression& parsed,
                                              const std::string& prompt_prefix);

/// Maps parsed token indices to rows of a response built from build_request_tokens.
std::vector<std::size_t> build_token_map(const ParsedExpression& parsed,
                                         const std::string& prompt_prefix);

/// Runs the refine / mask / re-query loop. An iteration whose soft ITM score drops
/// below the previous one is discarded and the loop stops.
RefinementState run_refinement(Backend& backend, const ParsedExpression& parsed,
                               const ImageRef& image, const RefinementConfig& config);

}  // namespace refcam
