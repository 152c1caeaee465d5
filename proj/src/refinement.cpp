#include "refcam/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "refcam/errors.hpp"
#include "refcam/heatmap.hpp"

namespace refcam {

namespace {

std::vector<std::string> split_prefix(const std::string& prefix) {
  std::istringstream in(prefix);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

}  // namespace

void RefinementConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (max_iterations < 1) throw ConfigError("iteration limit nu must be at least 1");
  if (!(difference_epsilon > 0.0)) throw ConfigError("difference epsilon must be positive");
}

Heatmap update_heatmap(const Heatmap& previous, const Heatmap& current, double lambda) {
  if (!previous.same_shape(current)) throw ShapeError("refined and current maps differ in shape");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  const Heatmap scaled = center_sigmoid(current);
  Heatmap out(previous.height(), previous.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Convex blend of [0,1] values; the clamp only absorbs last-ulp rounding.
    out[i] = std::clamp(lambda * previous[i] + (1.0 - lambda) * scaled[i], 0.0, 1.0);
  }
  return out;
}

Mask update_mask(const Mask& previous, const Heatmap& current, double theta) {
  if (previous.height() != current.height() || previous.width() != current.width()) {
    throw ShapeError("cumulative mask and heatmap differ in shape");
  }
  const Mask drop = threshold_drop_mask(current, theta);
  Mask out(previous.height(), previous.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (previous[i] != 0 && drop[i] != 0) ? 1 : 0;
  return out;
}

double relevance_score(const Heatmap& refined_previous_image) {
  if (refined_previous_image.empty()) throw InputError("relevance of an empty map");
  double overlooked = 0.0;
  for (double v : refined_previous_image.values()) overlooked += 1.0 - v;
  return overlooked / static_cast<double>(refined_previous_image.size());
}

double soft_itm(double itm, double relevance) { return itm * relevance; }

std::vector<std::string> build_request_tokens(const ParsedExpression& parsed,
                                              const std::string& prompt_prefix) {
  std::vector<std::string> tokens{std::string(kSentinelToken)};
  for (auto& w : split_prefix(prompt_prefix)) tokens.push_back(std::move(w));
  for (auto& w : parsed.words()) tokens.push_back(std::move(w));
  return tokens;
}

std::vector<std::size_t> build_token_map(const ParsedExpression& parsed,
                                         const std::string& prompt_prefix) {
  const std::size_t offset = split_prefix(prompt_prefix).size();
  std::vector<std::size_t> map(parsed.tokens.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = i == 0 ? 0 : i + offset;
  return map;
}

namespace {

// Same error class, message prefixed with the failing iteration.
[[noreturn]] void rethrow_with_iteration(const BackendError& e, std::size_t t) {
  const std::string what = "iteration " + std::to_string(t) + ": " + e.what();
  if (dynamic_cast<const TimeoutError*>(&e)) throw TimeoutError(what);
  if (dynamic_cast<const MalformedFrameError*>(&e)) throw MalformedFrameError(what);
  if (dynamic_cast<const InvariantViolationError*>(&e)) throw InvariantViolationError(what);
  if (dynamic_cast<const UnknownImageError*>(&e)) throw UnknownImageError(what);
  if (dynamic_cast<const RemoteError*>(&e)) throw RemoteError(what);
  throw TransportError(what);
}

}  // namespace

RefinementState run_refinement(Backend& backend, const ParsedExpression& parsed,
                               const ImageRef& image, const RefinementConfig& config) {
  config.validate();
  if (parsed.tokens.empty()) throw InputError("parsed expression has no tokens");
  if (image.width == 0 || image.height == 0) throw InputError("image size must be at least 1x1");

  const LatentShape latent = backend.latent_shape(image.id);
  RefinementState state;
  state.refined = Heatmap(latent.height, latent.width, 0.0);
  state.cumulative_mask = Mask(latent.height, latent.width, 1);

  BackendRequest request;
  request.image = image.id;
  request.tokens = build_request_tokens(parsed, config.prompt_prefix);
  request.mask_mode = config.mask_mode;
  const auto token_map = build_token_map(parsed, config.prompt_prefix);

  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    request.attention_mask = state.cumulative_mask;
    BackendResponse response;
    try {
      ++state.backend_calls;
      response = backend.forward(request);
      validate_response(request, response);
    } catch (const BackendError& e) {
      rethrow_with_iteration(e, t);
    }

    TokenSaliencyStack stack{std::move(response.attention), std::move(response.gradients),
                             token_map};
    IterationRecord record;
    record.t = t;
    record.gradcam = augment(stack, parsed, config.difference_epsilon).combined;
    record.drop_mask = threshold_drop_mask(record.gradcam, config.theta);
    record.itm = response.itm;
    record.relevance =
        relevance_score(bilinear_upsample(state.refined, image.width, image.height));
    record.score = soft_itm(record.itm, record.relevance);

    if (t >= 2 && record.score < state.scores.back()) {
      record.refined = state.refined;
      record.cumulative_mask = state.cumulative_mask;
      state.trace.push_back(std::move(record));
      state.stopped_by_score = true;
      break;
    }

    state.refined = update_heatmap(state.refined, record.gradcam, config.lambda);
    state.cumulative_mask = update_mask(state.cumulative_mask, record.gradcam, config.theta);
    state.scores.push_back(record.score);
    state.t = t;
    record.committed = true;
    record.refined = state.refined;
    record.cumulative_mask = state.cumulative_mask;
    state.trace.push_back(std::move(record));
  }
  return state;
}

}  // namespace refcam
