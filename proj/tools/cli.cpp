#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "refcam/bridge.hpp"
#include "refcam/errors.hpp"
#include "refcam/fixtures.hpp"
#include "refcam/pipeline.hpp"
#include "refcam/raster.hpp"
#include "refcam/synthetic.hpp"

namespace refcam::cli {

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  fs::path dataset;
  std::string backend;
  fs::path out;
  double lambda = 0.8;
  double theta = 0.5;
  std::size_t kappa = 12;
  std::size_t nu = 3;
  std::string mask_mode = "feature";
  int connectivity = 4;
  bool trace = false;
  std::optional<fs::path> lexicon;
  std::size_t jobs = 1;
  double timeout_s = 120.0;
  std::string prompt_prefix = "there is a";
};

struct EvalOptions {
  fs::path dataset;
  fs::path predictions;
  std::optional<fs::path> out;
  std::optional<fs::path> lexicon;
};

struct OverlayOptions {
  std::optional<fs::path> run_dir;
  std::string sample;
  std::optional<fs::path> heat;
  std::optional<fs::path> mask;
  std::optional<fs::path> image;
  fs::path out;
};

Lexicon load_lexicon(const std::optional<fs::path>& path) {
  return path ? Lexicon::from_file(*path) : Lexicon::builtin();
}

BackendFactory make_factory(const std::string& backend, std::size_t jobs, std::chrono::milliseconds timeout) {
  if (backend.starts_with("synth:")) {
    auto scenes = std::make_shared<std::vector<SyntheticScene>>(load_scenes(backend.substr(6)));
    return [scenes]() -> std::unique_ptr<Backend> { return std::make_unique<SyntheticBackend>(*scenes); };
  }
  if (backend.starts_with("bridge:")) {
    std::string endpoint = backend.substr(7);
    if (endpoint == "stdio" && jobs > 1) throw ConfigError("bridge:stdio supports a single job");
    return [endpoint, timeout]() -> std::unique_ptr<Backend> {
      return BridgeBackend::connect(endpoint, timeout);
    };
  }
  throw ConfigError("backend must be synth:FILE, bridge:HOST:PORT or bridge:stdio, got '" + backend + "'");
}

int do_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  PipelineConfig config;
  config.refinement.lambda = o.lambda;
  config.refinement.theta = o.theta;
  config.refinement.max_iterations = o.nu;
  config.refinement.mask_mode = mask_mode_from_string(o.mask_mode);
  config.refinement.prompt_prefix = o.prompt_prefix;
  config.refinement.validate();
  config.selector.kappa = o.kappa;
  config.selector.connectivity = connectivity_from_int(o.connectivity);
  config.jobs = o.jobs;
  if (o.jobs == 0) throw ConfigError("--jobs must be at least 1");
  if (!(o.timeout_s > 0.0)) throw ConfigError("--timeout must be positive");

  const Lexicon lexicon = load_lexicon(o.lexicon);
  const auto records = load_dataset(o.dataset);
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000.0));
  const auto factory = make_factory(o.backend, o.jobs, timeout);

  const PipelineResult result = run_pipeline(records, config, factory, lexicon);
  write_pipeline_outputs(o.out, result, o.trace);

  for (const auto& p : result.predictions) {
    if (!p.ok) err << "sample " << p.sample_id << " failed: " << p.error << '\n';
  }
  const auto& overall = result.report.overall;
  out << "samples: " << records.size() << ", failed: " << result.failures;
  if (overall) out << ", miou: " << overall->miou << ", oiou: " << overall->oiou;
  out << '\n';
  return result.failures == 0 ? kExitOk : kExitPartial;
}

int do_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const Lexicon lexicon = load_lexicon(o.lexicon);
  const auto records = load_dataset(o.dataset);
  const auto predictions = load_predictions(o.predictions);
  const MetricsReport report = aggregate_metrics(records, predictions, lexicon);
  const std::string text = report_to_json(report).dump(2) + "\n";
  if (o.out) {
    std::ofstream f(*o.out);
    if (!f) throw InputError("cannot write " + o.out->string());
    f << text;
  } else {
    out << text;
  }
  for (const auto& id : report.missing) err << "no prediction for sample " << id << '\n';
  return report.complete() ? kExitOk : kExitPartial;
}

Mask read_mask_for(const fs::path& predictions, const std::string& sample) {
  std::ifstream in(predictions);
  if (!in) throw InputError("cannot read " + predictions.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.at("sample_id").get<std::string>() != sample) continue;
    if (j.at("status") != "ok") throw InputError("sample " + sample + " has no prediction");
    return rle_decode(rle_from_json(j.at("rle")));
  }
  throw InputError("sample " + sample + " not found in " + predictions.string());
}

int do_overlay(const OverlayOptions& o, std::ostream& out) {
  Heatmap heat;
  Mask mask;
  if (o.run_dir) {
    if (o.sample.empty()) throw ConfigError("--sample is required with --run-dir");
    heat = read_pgm16(*o.run_dir / "heatmaps" / (sanitize_id(o.sample) + ".pgm"));
    mask = read_mask_for(*o.run_dir / "predictions.jsonl", o.sample);
  } else {
    if (!o.heat) throw ConfigError("either --run-dir or --heat is required");
    heat = read_pgm16(*o.heat);
    if (o.mask) {
      std::ifstream in(*o.mask);
      if (!in) throw InputError("cannot read " + o.mask->string());
      mask = rle_decode(rle_from_json(nlohmann::json::parse(in)));
    } else {
      mask = Mask(heat.height(), heat.width());
    }
  }
  std::optional<RgbImage> base;
  if (o.image) base = read_ppm(*o.image);
  write_ppm(o.out, render_overlay(base, heat, mask));
  out << o.out.string() << '\n';
  return kExitOk;
}

void add_config(CLI::App& sub) {
  sub.add_option("--config", "key=value file mirroring the flags; flags win");
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.starts_with(flag + "=")) return true;
  }
  return false;
}

// Appends "--key=value" for each config entry whose flag is absent from the
// command line, so explicit flags always take precedence over the file.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot read config file " + *path);
  const std::vector<std::string> original = args;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string flag = "--" + item.name;
    if (item.name == "config" || has_flag(original, flag)) continue;
    for (const auto& value : item.inputs) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Training-free referring segmentation with iterative Grad-CAM refinement"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Refine heatmaps and select masks for a dataset");
  add_config(*run_cmd);
  run_cmd->add_option("--dataset", run.dataset, "dataset JSON lines file")->required();
  run_cmd->add_option("--backend", run.backend, "synth:SCENES.json | bridge:HOST:PORT | bridge:stdio")
      ->required();
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--lambda", run.lambda, "weight on the previous refined map")->capture_default_str();
  run_cmd->add_option("--theta", run.theta, "drop threshold")->capture_default_str();
  run_cmd->add_option("--kappa", run.kappa, "maximum connected components")->capture_default_str();
  run_cmd->add_option("--nu", run.nu, "maximum iterations")->capture_default_str();
  run_cmd->add_option("--mask-mode", run.mask_mode, "feature | image")
      ->check(CLI::IsMember({"feature", "image"}))
      ->capture_default_str();
  run_cmd->add_option("--connectivity", run.connectivity, "4 | 8")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  run_cmd->add_flag("--trace", run.trace, "write per-iteration heatmaps");
  run_cmd->add_option("--lexicon", run.lexicon, "extra lexicon (lemma<TAB>TAG lines)");
  run_cmd->add_option("--jobs", run.jobs, "worker count")->capture_default_str();
  run_cmd->add_option("--timeout", run.timeout_s, "bridge timeout per request, seconds")->capture_default_str();
  run_cmd->add_option("--prompt-prefix", run.prompt_prefix, "text placed before the expression")
      ->capture_default_str();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a dataset");
  add_config(*eval_cmd);
  eval_cmd->add_option("--dataset", ev.dataset)->required();
  eval_cmd->add_option("--predictions", ev.predictions)->required();
  eval_cmd->add_option("--out", ev.out, "report path (stdout when omitted)");
  eval_cmd->add_option("--lexicon", ev.lexicon);

  OverlayOptions ov;
  auto* overlay_cmd = app.add_subcommand("overlay", "Render heat and selected mask as a PPM image");
  add_config(*overlay_cmd);
  overlay_cmd->add_option("--run-dir", ov.run_dir, "output directory of a run");
  overlay_cmd->add_option("--sample", ov.sample, "sample id within --run-dir");
  overlay_cmd->add_option("--heat", ov.heat, "16-bit PGM heatmap");
  overlay_cmd->add_option("--mask", ov.mask, "RLE JSON mask");
  overlay_cmd->add_option("--image", ov.image, "base PPM image (mid-gray when omitted)");
  overlay_cmd->add_option("--out", ov.out)->required();

  fs::path fixtures_dir;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write the bundled synthetic fixtures");
  add_config(*fixtures_cmd);
  fixtures_cmd->add_option("--out", fixtures_dir)->required();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = merge_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  std::vector<const char*> merged;
  for (const auto& a : args) merged.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(merged.size()), merged.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*run_cmd) return do_run(run, out, err);
    if (*eval_cmd) return do_eval(ev, out, err);
    if (*overlay_cmd) return do_overlay(ov, out);
    for (const auto& p : fixtures::write_fixtures(fixtures_dir)) out << (fixtures_dir / p).string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
}

}  // namespace refcam::cli
