#include "refcam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "refcam/errors.hpp"
#include "refcam/heatmap.hpp"
#include "refcam/raster.hpp"

namespace refcam {

using nlohmann::json;

SamplePrediction predict_sample(const EvalRecord& record, Backend& backend,
                                const PipelineConfig& config, const Lexicon& lexicon) {
  SamplePrediction out;
  out.sample_id = record.sample_id;
  out.parsed = parse_expression(record.expression, lexicon);
  const auto proposals = load_proposals(record.proposals);
  for (const auto& p : proposals) {
    if (p.mask.width() != record.image.width || p.mask.height() != record.image.height) {
      throw InputError("proposal " + std::to_string(p.id) + " differs in size from the image");
    }
  }
  const ImageRef image{record.image.id, record.image.width, record.image.height};
  out.refinement = run_refinement(backend, out.parsed, image, config.refinement);
  out.heat = bilinear_upsample(out.refinement.refined, image.width, image.height);

  const auto selection = select_mask(proposals, out.heat, config.selector);
  if (!selection.selected_id) throw NoCandidateError("every proposal is empty");
  out.proposal_id = selection.selected_id;
  out.relaxation = selection.relaxation;
  out.mask = std::ranges::find(proposals, *selection.selected_id, &MaskProposal::id)->mask;
  out.ok = true;
  return out;
}

PipelineResult run_pipeline(std::span<const EvalRecord> records, const PipelineConfig& config,
                            const BackendFactory& make_backend, const Lexicon& lexicon) {
  config.refinement.validate();
  PipelineResult result;
  result.predictions.resize(records.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&](Backend& backend) {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      SamplePrediction& slot = result.predictions[i];
      try {
        slot = predict_sample(records[i], backend, config, lexicon);
      } catch (const std::exception& e) {
        slot = SamplePrediction{};
        slot.sample_id = records[i].sample_id;
        slot.error = e.what();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, std::max<std::size_t>(records.size(), 1));
  if (jobs == 1) {
    auto backend = make_backend();
    worker(*backend);
  } else {
    // Backends are created up front so connection errors abort before any work starts.
    std::vector<std::unique_ptr<Backend>> backends;
    for (std::size_t j = 0; j < jobs; ++j) backends.push_back(make_backend());
    std::vector<std::jthread> pool;
    for (auto& b : backends) pool.emplace_back([&worker, &b] { worker(*b); });
  }

  std::ranges::sort(result.predictions, {}, &SamplePrediction::sample_id);
  std::map<std::string, Mask> masks;
  for (const auto& p : result.predictions) {
    if (p.ok) {
      masks[p.sample_id] = p.mask;
    } else {
      ++result.failures;
    }
  }
  result.report = aggregate_metrics(records, masks, lexicon);
  return result;
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

namespace {

Heatmap mask_as_heat(const Mask& mask) {
  Heatmap out(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] != 0 ? 1.0 : 0.0;
  return out;
}

void write_trace(const std::filesystem::path& dir, const SamplePrediction& p) {
  std::filesystem::create_directories(dir);
  json iterations = json::array();
  const std::size_t width = p.heat.width();
  const std::size_t height = p.heat.height();
  for (const auto& rec : p.refinement.trace) {
    const std::string stem = "iter" + std::to_string(rec.t);
    write_pgm16(dir / (stem + "_gradcam.pgm"), bilinear_upsample(center_sigmoid(rec.gradcam), width, height));
    write_pgm16(dir / (stem + "_refined.pgm"), bilinear_upsample(rec.refined, width, height));
    write_pgm16(dir / (stem + "_mask.pgm"), mask_as_heat(rec.cumulative_mask));
    iterations.push_back({{"t", rec.t},
                          {"itm", rec.itm},
                          {"relevance", rec.relevance},
                          {"score", rec.score},
                          {"committed", rec.committed}});
  }
  std::ofstream out(dir / "trace.json");
  out << json{{"sample_id", p.sample_id},
              {"committed_iterations", p.refinement.t},
              {"backend_calls", p.refinement.backend_calls},
              {"stopped_by_score", p.refinement.stopped_by_score},
              {"iterations", iterations}}
             .dump(2)
      << '\n';
}

}  // namespace

void write_pipeline_outputs(const std::filesystem::path& out_dir, const PipelineResult& result,
                            bool trace) {
  std::filesystem::create_directories(out_dir / "heatmaps");
  std::ofstream predictions(out_dir / "predictions.jsonl");
  if (!predictions) throw InputError("cannot write into " + out_dir.string());
  for (const auto& p : result.predictions) {
    json line = {{"sample_id", p.sample_id}, {"status", p.ok ? "ok" : "failed"}};
    if (p.ok) {
      line["proposal_id"] = *p.proposal_id;
      line["relaxation"] = std::string(to_string(p.relaxation));
      line["iterations"] = p.refinement.t;
      line["primary_word"] = p.parsed.tokens[p.parsed.primary].surface;
      line["rle"] = rle_to_json(rle_encode(p.mask));
      write_pgm16(out_dir / "heatmaps" / (sanitize_id(p.sample_id) + ".pgm"), p.heat);
      if (trace) write_trace(out_dir / "trace" / sanitize_id(p.sample_id), p);
    } else {
      line["error"] = p.error;
    }
    predictions << line.dump() << '\n';
  }
  std::ofstream report(out_dir / "report.json");
  json j = report_to_json(result.report);
  j["failures"] = result.failures;
  report << j.dump(2) << '\n';
}

}  // namespace refcam
