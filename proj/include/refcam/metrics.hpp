#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "refcam/dataset.hpp"
#include "refcam/expression.hpp"
#include "refcam/grid.hpp"

namespace refcam {

struct Overlap {
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;
};

Overlap overlap(const Mask& a, const Mask& b);

/// |a & b| / |a | b|; two empty masks agree perfectly (1).
double iou(const Mask& a, const Mask& b);

struct SampleScore {
  std::string sample_id;
  double iou = 0.0;
  Overlap counts;
  bool positional = false;
};

struct BucketMetrics {
  std::size_t count = 0;
  double miou = 0.0;  // unweighted mean of per-sample IoU
  double oiou = 0.0;  // total intersection / total union
};

struct MetricsReport {
  std::vector<SampleScore> per_sample;  // sorted by sample_id
  std::optional<BucketMetrics> overall;
  std::optional<BucketMetrics> position;  // absent when no sample is positional
  std::optional<BucketMetrics> others;
  std::vector<std::string> missing;  // records without a prediction

  bool complete() const { return missing.empty(); }
};

std::optional<BucketMetrics> bucket_metrics(std::span<const SampleScore> scores);

MetricsReport aggregate_metrics(std::span<const EvalRecord> records,
                                const std::map<std::string, Mask>& predictions,
                                const Lexicon& lexicon = Lexicon::builtin());

nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace refcam
