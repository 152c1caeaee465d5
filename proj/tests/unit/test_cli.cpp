#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "refcam/dataset.hpp"
#include "temp_dir.hpp"

using testing_support::slurp;
using testing_support::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "refcam");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = refcam::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("fixtures, run and eval") {
  TempDir dir("refcam_cli");
  const std::string fx = (dir / "fx").string();
  REQUIRE(cli({"fixtures", "--out", fx}).code == 0);
  const std::string backend = "synth:" + fx + "/scenes.json";

  const auto run = cli({"run", "--dataset", fx + "/pipeline.jsonl", "--backend", backend, "--out",
                        (dir / "run").string()});
  CHECK(run.code == 0);
  CHECK(run.out.find("failed: 0") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "run/heatmaps/dog.pgm"));
  CHECK_FALSE(std::filesystem::exists(dir / "run/trace"));

  const auto ev = cli({"eval", "--dataset", fx + "/pipeline.jsonl", "--predictions",
                       (dir / "run/predictions.jsonl").string()});
  CHECK(ev.code == 0);
  CHECK(nlohmann::json::parse(ev.out)["overall"]["count"] == 2);

  const auto metrics = cli({"eval", "--dataset", fx + "/metrics.jsonl", "--predictions",
                            fx + "/metrics_predictions.jsonl", "--out", (dir / "m.json").string()});
  CHECK(metrics.code == 0);
  std::ifstream report(dir / "m.json");
  CHECK(nlohmann::json::parse(report)["position"]["count"] == 2);

  const auto overlay = cli({"overlay", "--run-dir", (dir / "run").string(), "--sample", "dog", "--out",
                            (dir / "o.ppm").string()});
  CHECK(overlay.code == 0);
  CHECK(slurp(dir / "o.ppm").rfind("P6\n76 76\n255\n", 0) == 0);
}

TEST_CASE("exit codes") {
  TempDir dir("refcam_cli");
  const std::string fx = (dir / "fx").string();
  REQUIRE(cli({"fixtures", "--out", fx}).code == 0);
  const std::string backend = "synth:" + fx + "/scenes.json";

  SUBCASE("a failed sample is a partial failure") {
    std::ofstream(dir / "broken.jsonl") << [&] {
      std::string s = slurp(fx + "/pipeline.jsonl");
      s.replace(s.find("proposals/dog.json"), 18, "proposals/cat.json");
      return s;
    }();
    const auto r = cli({"run", "--dataset", (dir / "broken.jsonl").string(), "--backend", backend, "--out",
                        (dir / "run").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("sample dog failed") != std::string::npos);
  }
  SUBCASE("missing predictions in eval are partial") {
    std::ofstream(dir / "one.jsonl") << slurp(fx + "/metrics_predictions.jsonl").substr(0, 10) << '\n';
    std::ofstream(dir / "empty.jsonl") << "";
    CHECK(cli({"eval", "--dataset", fx + "/metrics.jsonl", "--predictions", (dir / "empty.jsonl").string()}).code ==
          1);
  }
  SUBCASE("fatal errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"run", "--dataset", fx + "/pipeline.jsonl"}).code == 2);
    CHECK(cli({"run", "--dataset", fx + "/pipeline.jsonl", "--backend", "magic:x", "--out", "o"}).code == 2);
    CHECK(cli({"run", "--dataset", fx + "/nope.jsonl", "--backend", backend, "--out", "o"}).code == 2);
    CHECK(cli({"run", "--dataset", fx + "/pipeline.jsonl", "--backend", backend, "--out", "o", "--theta", "1.5"})
              .code == 2);
    CHECK(cli({"run", "--dataset", fx + "/pipeline.jsonl", "--backend", backend, "--out", "o", "--connectivity",
               "6"})
              .code == 2);
    CHECK(cli({"run", "--config", (dir / "absent.ini").string()}).code == 2);
  }
  SUBCASE("help is success") { CHECK(cli({"--help"}).code == 0); }
}

TEST_CASE("config file values apply and flags override them") {
  TempDir dir("refcam_cli");
  const std::string fx = (dir / "fx").string();
  REQUIRE(cli({"fixtures", "--out", fx}).code == 0);
  std::ofstream(dir / "run.ini") << "# positional fixture\n"
                                 << "dataset=" << fx << "/self_correction.jsonl\n"
                                 << "backend=synth:" << fx << "/scenes.json\n"
                                 << "out=" << (dir / "cfg").string() << "\n"
                                 << "nu=1\n"
                                 << "trace=true\n";
  auto iou = [&] {
    std::ifstream in(dir / "cfg/report.json");
    return nlohmann::json::parse(in)["per_sample"][0]["iou"].get<double>();
  };
  REQUIRE(cli({"run", "--config", (dir / "run.ini").string()}).code == 0);
  CHECK(iou() < 0.2);
  CHECK(std::filesystem::exists(dir / "cfg/trace/bikes-right/trace.json"));
  REQUIRE(cli({"run", "--config", (dir / "run.ini").string(), "--nu", "3"}).code == 0);
  CHECK(iou() >= 0.9);
}

TEST_CASE("two identical runs write identical bytes") {
  TempDir dir("refcam_cli");
  const std::string fx = (dir / "fx").string();
  REQUIRE(cli({"fixtures", "--out", fx}).code == 0);
  for (const char* out : {"a", "b"}) {
    REQUIRE(cli({"run", "--dataset", fx + "/pipeline.jsonl", "--backend", "synth:" + fx + "/scenes.json", "--out",
                 (dir / out).string(), "--trace"})
                .code == 0);
  }
  CHECK(slurp(dir / "a/predictions.jsonl") == slurp(dir / "b/predictions.jsonl"));
  CHECK(slurp(dir / "a/report.json") == slurp(dir / "b/report.json"));
}
