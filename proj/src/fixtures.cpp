#include "refcam/fixtures.hpp"

#include <fstream>

#include "refcam/errors.hpp"
#include "refcam/expression.hpp"
#include "refcam/refinement.hpp"
#include "refcam/tensor_io.hpp"

namespace refcam::fixtures {

namespace {

constexpr double kScale = static_cast<double>(kImageSide - 1) / static_cast<double>(kLatentSide - 1);
constexpr double kRowY = 7.5;

Blob make_blob(double cx, double cy, double sigma, double salience, std::string tag,
               std::string qualifier, double bias) {
  Blob b;
  b.center_x = cx;
  b.center_y = cy;
  b.sigma = sigma;
  b.salience = salience;
  b.tags = {std::move(tag)};
  b.qualifiers = {std::move(qualifier)};
  b.distractor_bias = bias;
  return b;
}

// Disk radii cover 1.5 sigma of each blob in image pixels.
Mask blob_disk(const Blob& b) {
  return disk(kImageSide, kImageSide, b.center_x * kScale, b.center_y * kScale, 1.5 * b.sigma * kScale);
}

Mask complement(const Mask& m) {
  Mask out(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] == 0 ? 1 : 0;
  return out;
}

Mask from_rows(const std::vector<std::string>& rows) {
  Mask m(rows.size(), rows.front().size());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) m(y, x) = rows[y][x] == '#' ? 1 : 0;
  }
  return m;
}

}  // namespace

SyntheticScene two_bikes_scene() {
  SyntheticScene s;
  s.image = "bikes";
  s.image_width = kImageSide;
  s.image_height = kImageSide;
  s.latent = {kLatentSide, kLatentSide};
  s.blobs = {make_blob(4.0, kRowY, 2.0, 0.9, "bike", "left", 1.5),
             make_blob(12.0, kRowY, 1.0, 0.6, "bike", "right", 1.0)};
  return s;
}

SyntheticScene dog_scene() {
  SyntheticScene s;
  s.image = "dog";
  s.image_width = kImageSide;
  s.image_height = kImageSide;
  s.latent = {kLatentSide, kLatentSide};
  s.blobs = {make_blob(8.0, 6.0, 2.0, 0.9, "dog", "brown", 1.0)};
  return s;
}

std::vector<SyntheticScene> scenes() { return {two_bikes_scene(), dog_scene()}; }

Mask disk(std::size_t width, std::size_t height, double cx, double cy, double radius) {
  Mask m(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      m(y, x) = dx * dx + dy * dy <= radius * radius ? 1 : 0;
    }
  }
  return m;
}

Mask left_bike_mask() { return blob_disk(two_bikes_scene().blobs[0]); }
Mask right_bike_mask() { return blob_disk(two_bikes_scene().blobs[1]); }
Mask dog_mask() { return blob_disk(dog_scene().blobs[0]); }

std::vector<MaskProposal> two_bikes_proposals() {
  Mask left = left_bike_mask();
  Mask right = right_bike_mask();
  Mask background(kImageSide, kImageSide, 1);
  for (std::size_t i = 0; i < background.size(); ++i) {
    if (left[i] != 0 || right[i] != 0) background[i] = 0;
  }
  Mask specks = right;
  for (std::size_t k = 0; k < 12; ++k) specks(2, 2 + 4 * k) = 1;
  return {{1, left}, {2, right}, {3, background}, {4, specks}, {5, Mask(kImageSide, kImageSide)}};
}

std::vector<MaskProposal> dog_proposals() {
  Mask dog = dog_mask();
  Mask corner(kImageSide, kImageSide);
  for (std::size_t y = 52; y < 62; ++y) {
    for (std::size_t x = 2; x < 12; ++x) corner(y, x) = 1;
  }
  return {{1, dog}, {2, complement(dog)}, {3, corner}, {4, Mask(kImageSide, kImageSide)}};
}

EvalRecord make_record(const std::string& sample_id, const SyntheticScene& scene,
                       const std::string& expression, const std::string& proposals,
                       const Mask& gt, std::vector<std::string> split_tags) {
  EvalRecord r;
  r.sample_id = sample_id;
  r.image = {scene.image, scene.image_width, scene.image_height, std::nullopt};
  r.expression = expression;
  r.proposals = proposals;
  r.gt = rle_encode(gt);
  r.split_tags = std::move(split_tags);
  return r;
}

std::vector<EvalRecord> self_correction_dataset() {
  return {make_record("bikes-right", two_bikes_scene(), "the right bike", "proposals/bikes.json",
                      right_bike_mask(), {"fixture", "positional"})};
}

std::vector<EvalRecord> pipeline_dataset() {
  return {make_record("bikes-left", two_bikes_scene(), "the left bike", "proposals/bikes.json",
                      left_bike_mask(), {"fixture"}),
          make_record("dog", dog_scene(), "a brown dog", "proposals/dog.json", dog_mask(), {"fixture"})};
}

MetricsFixture metrics_fixture() {
  MetricsFixture f;
  const SyntheticScene grid4{"cups", 4, 4, {4, 4}, {}};
  const Mask block = from_rows({"....", ".##.", ".##.", "...."});
  const Mask top = from_rows({"####", "....", "....", "...."});
  const Mask full(4, 4, 1);
  const Mask a = from_rows({"#...", "....", "....", "...."});
  const Mask b = from_rows({"....", "....", "....", "...#"});

  // IoU 1 (4/4), 0.25 (4/16) and 0 (0/2).
  f.records = {make_record("m1", grid4, "the left cup", "proposals/metrics.json", block, {"metrics"}),
               make_record("m2", grid4, "a red cup", "proposals/metrics.json", top, {"metrics"}),
               make_record("m3", grid4, "cup behind the plate", "proposals/metrics.json", a, {"metrics"})};
  f.predictions = {{"m1", block}, {"m2", full}, {"m3", b}};
  f.proposals = {{1, block}, {2, full}, {3, b}};
  return f;
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> write_fixtures(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "proposals");
  fs::create_directories(dir / "dumps");
  std::vector<fs::path> written;

  nlohmann::json scene_array = nlohmann::json::array();
  for (const auto& s : scenes()) scene_array.push_back(scene_to_json(s));
  write_json(dir / "scenes.json", scene_array);
  written.emplace_back("scenes.json");

  save_proposals(dir / "proposals/bikes.json", two_bikes_proposals());
  save_proposals(dir / "proposals/dog.json", dog_proposals());
  const MetricsFixture metrics = metrics_fixture();
  save_proposals(dir / "proposals/metrics.json", metrics.proposals);
  for (const char* p : {"proposals/bikes.json", "proposals/dog.json", "proposals/metrics.json"}) {
    written.emplace_back(p);
  }

  save_dataset(dir / "self_correction.jsonl", self_correction_dataset());
  save_dataset(dir / "pipeline.jsonl", pipeline_dataset());
  save_dataset(dir / "metrics.jsonl", metrics.records);
  for (const char* p : {"self_correction.jsonl", "pipeline.jsonl", "metrics.jsonl"}) written.emplace_back(p);

  {
    std::ofstream out(dir / "metrics_predictions.jsonl");
    for (const auto& [id, mask] : metrics.predictions) {
      out << nlohmann::json{{"sample_id", id}, {"status", "ok"}, {"rle", rle_to_json(rle_encode(mask))}}.dump()
          << '\n';
    }
    written.emplace_back("metrics_predictions.jsonl");
  }

  // Unmasked forward pass of each self-correction / pipeline sample, for replay tests.
  std::vector<EvalRecord> all = self_correction_dataset();
  for (auto& r : pipeline_dataset()) all.push_back(std::move(r));
  SyntheticBackend backend(scenes());
  nlohmann::json index = nlohmann::json::array();
  for (const auto& r : all) {
    const ParsedExpression parsed = parse_expression(r.expression);
    BackendRequest request;
    request.image = r.image.id;
    request.tokens = build_request_tokens(parsed, "there is a");
    const LatentShape latent = backend.latent_shape(r.image.id);
    request.attention_mask = Mask(latent.height, latent.width, 1);
    const BackendResponse response = backend.forward(request);
    const std::string stem = "dumps/" + r.sample_id;
    write_tensor_dump(dir / (stem + "_attention.irpe"), response.attention);
    write_tensor_dump(dir / (stem + "_gradients.irpe"), response.gradients);
    index.push_back({{"sample_id", r.sample_id},
                     {"image", r.image.id},
                     {"tokens", request.tokens},
                     {"itm", response.itm},
                     {"attention", stem + "_attention.irpe"},
                     {"gradients", stem + "_gradients.irpe"}});
    written.emplace_back(stem + "_attention.irpe");
    written.emplace_back(stem + "_gradients.irpe");
  }
  write_json(dir / "dumps/index.json", index);
  written.emplace_back("dumps/index.json");
  return written;
}

}  // namespace refcam::fixtures
