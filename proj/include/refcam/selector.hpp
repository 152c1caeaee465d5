#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "refcam/grid.hpp"
#include "refcam/heatmap.hpp"
#include "refcam/rle.hpp"

namespace refcam {

enum class Connectivity { Four = 4, Eight = 8 };
Connectivity connectivity_from_int(int value);

std::size_t connected_components(const Mask& mask, Connectivity connectivity = Connectivity::Four);

enum class FilterReason { Empty, NoPeakCoverage, TooFragmented };
std::string_view to_string(FilterReason reason);

struct FilterResult {
  std::vector<std::int64_t> candidates;  // in proposal order
  std::map<std::int64_t, FilterReason> filtered_out;
};

/// Keeps proposals that cover at least one peak and have between 1 and kappa components.
FilterResult filter_proposals(std::span<const MaskProposal> proposals, std::span<const Coord> peaks,
                              std::size_t kappa, Connectivity connectivity = Connectivity::Four);

/// Mean of (B + B * H) over each candidate mask: 1 + masked mean heat, in [1, 2].
std::map<std::int64_t, double> score_proposals(std::span<const MaskProposal> proposals,
                                               std::span<const std::int64_t> candidates,
                                               const Heatmap& heat);

/// Highest score wins; ties go to the lowest id. Throws NoCandidateError when empty.
std::int64_t select_best(std::span<const std::int64_t> candidates,
                         const std::map<std::int64_t, double>& scores);

/// Which fallback produced the candidate set when the strict filter left nothing.
enum class Relaxation { None, DropKappa, DropPeakCoverage };
std::string_view to_string(Relaxation relaxation);

struct SelectorConfig {
  std::size_t kappa = 12;
  Connectivity connectivity = Connectivity::Four;
  double tie_epsilon = kDefaultTieEpsilon;
};

struct SelectionResult {
  std::optional<std::int64_t> selected_id;  // empty only when every proposal is empty
  std::vector<std::int64_t> candidates;
  std::map<std::int64_t, double> scores;
  std::map<std::int64_t, FilterReason> filtered_out;
  Relaxation relaxation = Relaxation::None;
  std::vector<Coord> peaks;
};

/// Filter, score and pick against an image-resolution heatmap. If nothing passes,
/// retries without the component limit, then without peak coverage.
SelectionResult select_mask(std::span<const MaskProposal> proposals, const Heatmap& heat,
                            const SelectorConfig& config = {});

}  // namespace refcam
