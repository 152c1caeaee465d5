#include "refcam/dataset.hpp"

#include <fstream>
#include <set>

#include "refcam/errors.hpp"

namespace refcam {

using nlohmann::json;

Mask EvalRecord::gt_mask() const { return rle_decode(gt); }

json record_to_json(const EvalRecord& record) {
  json image = {{"id", record.image.id},
                {"width", record.image.width},
                {"height", record.image.height}};
  if (record.image.path) image["path"] = record.image.path->generic_string();
  return {{"sample_id", record.sample_id},
          {"image", image},
          {"expression", record.expression},
          {"proposals", record.proposals.generic_string()},
          {"gt", rle_to_json(record.gt)},
          {"split_tags", record.split_tags}};
}

EvalRecord record_from_json(const json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  EvalRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    const auto& image = j.at("image");
    r.image.width = image.at("width").get<std::size_t>();
    r.image.height = image.at("height").get<std::size_t>();
    r.image.id = image.value("id", r.sample_id);
    if (image.contains("path") && image.at("path").is_string()) {
      r.image.path = resolve(image.at("path").get<std::string>());
    }
    r.expression = j.at("expression").get<std::string>();
    r.proposals = resolve(j.at("proposals").get<std::string>());
    r.gt = rle_from_json(j.at("gt"));
    r.split_tags = j.value("split_tags", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw InputError("malformed dataset record: " + std::string(e.what()));
  }
  if (r.sample_id.empty()) throw InputError("dataset record has an empty sample_id");
  if (r.image.width == 0 || r.image.height == 0) {
    throw InputError("sample " + r.sample_id + ": image size must be at least 1x1");
  }
  if (r.gt.width != r.image.width || r.gt.height != r.image.height) {
    throw InputError("sample " + r.sample_id + ": ground truth size differs from the image size");
  }
  return r;
}

std::vector<EvalRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  std::vector<EvalRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    auto record = record_from_json(j, path.parent_path());
    if (!seen.insert(record.sample_id).second) {
      throw InputError("duplicate sample_id '" + record.sample_id + "'");
    }
    records.push_back(std::move(record));
  }
  return records;
}

void save_dataset(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::map<std::string, Mask> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions " + path.string());
  std::map<std::string, Mask> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("status", std::string("ok")) != "ok") continue;
      out[j.at("sample_id").get<std::string>()] = rle_decode(rle_from_json(j.at("rle")));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace refcam
