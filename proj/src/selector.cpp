#include "refcam/selector.hpp"

#include <algorithm>
#include <numeric>

#include "refcam/errors.hpp"

namespace refcam {

namespace {

// Union-find over pixel indices with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool covers_any(const Mask& mask, std::span<const Coord> peaks) {
  return std::ranges::any_of(peaks, [&](const Coord& c) {
    return c.y < mask.height() && c.x < mask.width() && mask(c.y, c.x) != 0;
  });
}

bool is_empty(const Mask& mask) {
  return std::ranges::none_of(mask.values(), [](auto v) { return v != 0; });
}

}  // namespace

Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::Four;
  if (value == 8) return Connectivity::Eight;
  throw ConfigError("connectivity must be 4 or 8");
}

std::size_t connected_components(const Mask& mask, Connectivity connectivity) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  DisjointSets sets(mask.size());
  // Scan order only needs the already-visited neighbours: up, left, and the two upper diagonals.
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (mask(y, x) == 0) continue;
      const std::size_t i = y * w + x;
      if (x > 0 && mask(y, x - 1) != 0) sets.unite(i, i - 1);
      if (y > 0 && mask(y - 1, x) != 0) sets.unite(i, i - w);
      if (connectivity == Connectivity::Eight && y > 0) {
        if (x > 0 && mask(y - 1, x - 1) != 0) sets.unite(i, i - w - 1);
        if (x + 1 < w && mask(y - 1, x + 1) != 0) sets.unite(i, i - w + 1);
      }
    }
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0 && sets.find(i) == i) ++count;
  }
  return count;
}

std::string_view to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::Empty: return "empty";
    case FilterReason::NoPeakCoverage: return "no-peak-coverage";
    case FilterReason::TooFragmented: return "too-fragmented";
  }
  return "unknown";
}

std::string_view to_string(Relaxation relaxation) {
  switch (relaxation) {
    case Relaxation::None: return "none";
    case Relaxation::DropKappa: return "drop-kappa";
    case Relaxation::DropPeakCoverage: return "drop-peak-coverage";
  }
  return "unknown";
}

FilterResult filter_proposals(std::span<const MaskProposal> proposals, std::span<const Coord> peaks,
                              std::size_t kappa, Connectivity connectivity) {
  if (kappa < 1) throw ConfigError("kappa must be at least 1");
  FilterResult out;
  for (const auto& p : proposals) {
    if (is_empty(p.mask)) {
      out.filtered_out[p.id] = FilterReason::Empty;
    } else if (!covers_any(p.mask, peaks)) {
      out.filtered_out[p.id] = FilterReason::NoPeakCoverage;
    } else if (connected_components(p.mask, connectivity) > kappa) {
      out.filtered_out[p.id] = FilterReason::TooFragmented;
    } else {
      out.candidates.push_back(p.id);
    }
  }
  return out;
}

std::map<std::int64_t, double> score_proposals(std::span<const MaskProposal> proposals,
                                               std::span<const std::int64_t> candidates,
                                               const Heatmap& heat) {
  std::map<std::int64_t, double> scores;
  for (std::int64_t id : candidates) {
    const auto it = std::ranges::find(proposals, id, &MaskProposal::id);
    if (it == proposals.end()) throw InternalError("candidate id missing from proposals");
    const Mask& mask = it->mask;
    if (mask.height() != heat.height() || mask.width() != heat.width()) {
      throw ShapeError("proposal mask and heatmap differ in size");
    }
    double weighted = 0.0;
    double area = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      const double b = mask[i] != 0 ? 1.0 : 0.0;
      weighted += b + b * heat[i];
      area += b;
    }
    if (area == 0.0) throw InternalError("empty mask reached the scoring stage");
    scores[id] = weighted / area;
  }
  return scores;
}

std::int64_t select_best(std::span<const std::int64_t> candidates,
                         const std::map<std::int64_t, double>& scores) {
  if (candidates.empty()) throw NoCandidateError("no candidate mask to select");
  std::optional<std::int64_t> best;
  double best_score = 0.0;
  for (std::int64_t id : candidates) {
    const double s = scores.at(id);
    if (!best || s > best_score || (s == best_score && id < *best)) {
      best = id;
      best_score = s;
    }
  }
  return *best;
}

SelectionResult select_mask(std::span<const MaskProposal> proposals, const Heatmap& heat,
                            const SelectorConfig& config) {
  SelectionResult result;
  result.peaks = argmax_coords(heat, config.tie_epsilon);

  auto filtered = filter_proposals(proposals, result.peaks, config.kappa, config.connectivity);
  result.filtered_out = filtered.filtered_out;
  result.candidates = filtered.candidates;

  if (result.candidates.empty()) {
    const std::size_t unlimited = std::max<std::size_t>(heat.size(), 1);
    auto relaxed = filter_proposals(proposals, result.peaks, unlimited, config.connectivity);
    if (!relaxed.candidates.empty()) {
      result.relaxation = Relaxation::DropKappa;
      result.candidates = relaxed.candidates;
    }
  }
  if (result.candidates.empty()) {
    for (const auto& p : proposals) {
      if (!is_empty(p.mask)) result.candidates.push_back(p.id);
    }
    if (!result.candidates.empty()) result.relaxation = Relaxation::DropPeakCoverage;
  }
  if (result.candidates.empty()) return result;

  result.scores = score_proposals(proposals, result.candidates, heat);
  result.selected_id = select_best(result.candidates, result.scores);
  return result;
}

}  // namespace refcam
