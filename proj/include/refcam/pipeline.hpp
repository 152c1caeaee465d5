#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refcam/backend.hpp"
#include "refcam/dataset.hpp"
#include "refcam/expression.hpp"
#include "refcam/metrics.hpp"
#include "refcam/refinement.hpp"
#include "refcam/selector.hpp"

namespace refcam {

struct PipelineConfig {
  RefinementConfig refinement;
  SelectorConfig selector;
  std::size_t jobs = 1;
};

struct SamplePrediction {
  std::string sample_id;
  bool ok = false;
  std::string error;
  std::optional<std::int64_t> proposal_id;
  Mask mask;
  Relaxation relaxation = Relaxation::None;
  Heatmap heat;  // final refined map at image resolution
  RefinementState refinement;
  ParsedExpression parsed;
};

struct PipelineResult {
  std::vector<SamplePrediction> predictions;  // sorted by sample_id
  MetricsReport report;
  std::size_t failures = 0;
};

/// parse -> refine -> upsample -> select for one record.
SamplePrediction predict_sample(const EvalRecord& record, Backend& backend,
                                const PipelineConfig& config,
                                const Lexicon& lexicon = Lexicon::builtin());

/// Creates one backend per worker.
using BackendFactory = std::function<std::unique_ptr<Backend>()>;

/// Runs every record; a failing sample is recorded and skipped, the rest continue.
PipelineResult run_pipeline(std::span<const EvalRecord> records, const PipelineConfig& config,
                            const BackendFactory& make_backend,
                            const Lexicon& lexicon = Lexicon::builtin());

/// Writes predictions.jsonl, report.json and heatmaps/<id>.pgm under out_dir; with
/// trace, also trace/<id>/ with per-iteration maps and scores.
void write_pipeline_outputs(const std::filesystem::path& out_dir, const PipelineResult& result,
                            bool trace);

/// File-system safe form of a sample id.
std::string sanitize_id(const std::string& id);

}  // namespace refcam
