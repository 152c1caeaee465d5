#include "refcam/metrics.hpp"

#include <algorithm>

#include "refcam/errors.hpp"

namespace refcam {

using nlohmann::json;

Overlap overlap(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw ShapeError("IoU operands differ in size");
  Overlap o;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] != 0;
    const bool in_b = b[i] != 0;
    o.intersection += (in_a && in_b) ? 1 : 0;
    o.union_ += (in_a || in_b) ? 1 : 0;
  }
  return o;
}

double iou(const Mask& a, const Mask& b) {
  const Overlap o = overlap(a, b);
  if (o.union_ == 0) return 1.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.union_);
}

std::optional<BucketMetrics> bucket_metrics(std::span<const SampleScore> scores) {
  if (scores.empty()) return std::nullopt;
  BucketMetrics m;
  m.count = scores.size();
  double iou_sum = 0.0;
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  for (const auto& s : scores) {
    iou_sum += s.iou;
    inter += s.counts.intersection;
    uni += s.counts.union_;
  }
  m.miou = iou_sum / static_cast<double>(scores.size());
  m.oiou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  return m;
}

MetricsReport aggregate_metrics(std::span<const EvalRecord> records,
                                const std::map<std::string, Mask>& predictions,
                                const Lexicon& lexicon) {
  MetricsReport report;
  for (const auto& record : records) {
    const auto it = predictions.find(record.sample_id);
    if (it == predictions.end()) {
      report.missing.push_back(record.sample_id);
      continue;
    }
    const Mask gt = record.gt_mask();
    SampleScore s;
    s.sample_id = record.sample_id;
    s.counts = overlap(it->second, gt);
    s.iou = s.counts.union_ == 0 ? 1.0
                                 : static_cast<double>(s.counts.intersection) /
                                       static_cast<double>(s.counts.union_);
    s.positional = detect_positional(tokenize_and_tag(record.expression, lexicon));
    report.per_sample.push_back(std::move(s));
  }
  std::ranges::sort(report.per_sample, {}, &SampleScore::sample_id);
  std::ranges::sort(report.missing);

  std::vector<SampleScore> position;
  std::vector<SampleScore> others;
  for (const auto& s : report.per_sample) (s.positional ? position : others).push_back(s);
  report.overall = bucket_metrics(report.per_sample);
  report.position = bucket_metrics(position);
  report.others = bucket_metrics(others);
  return report;
}

json report_to_json(const MetricsReport& report) {
  auto bucket = [](const std::optional<BucketMetrics>& b) -> json {
    if (!b) return nullptr;
    return {{"count", b->count}, {"miou", b->miou}, {"oiou", b->oiou}};
  };
  json samples = json::array();
  for (const auto& s : report.per_sample) {
    samples.push_back({{"sample_id", s.sample_id},
                       {"iou", s.iou},
                       {"intersection", s.counts.intersection},
                       {"union", s.counts.union_},
                       {"positional", s.positional}});
  }
  return {{"overall", bucket(report.overall)},
          {"position", bucket(report.position)},
          {"others", bucket(report.others)},
          {"per_sample", samples},
          {"missing", report.missing},
          {"complete", report.complete()}};
}

}  // namespace refcam
