#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "refcam/rle.hpp"

namespace refcam {

struct ImageInfo {
  std::string id;
  std::size_t width = 0;   // X
  std::size_t height = 0;  // Y
  std::optional<std::filesystem::path> path;
};

/// One line of a dataset file (JSON lines):
///   {"sample_id": ..., "image": {"id": ..., "width": X, "height": Y, "path": ...},
///    "expression": ..., "proposals": "<file>", "gt": {"size": [Y, X], "counts": [...]},
///    "split_tags": [...]}
/// Relative paths resolve against the dataset file's directory.
struct EvalRecord {
  std::string sample_id;
  ImageInfo image;
  std::string expression;
  std::filesystem::path proposals;
  Rle gt;
  std::vector<std::string> split_tags;

  Mask gt_mask() const;
};

nlohmann::json record_to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

std::vector<EvalRecord> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const std::vector<EvalRecord>& records);

/// Reads the masks of successful entries from a predictions file written by run.
std::map<std::string, Mask> load_predictions(const std::filesystem::path& path);

}  // namespace refcam
