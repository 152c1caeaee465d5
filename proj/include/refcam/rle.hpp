#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "refcam/grid.hpp"

namespace refcam {

/// Uncompressed run lengths over a row-major mask, alternating zero-runs and
/// one-runs and always starting with a (possibly empty) zero-run.
struct Rle {
  std::size_t height = 0;  // Y
  std::size_t width = 0;   // X
  std::vector<std::uint64_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

Rle rle_encode(const Mask& mask);
/// Throws InputError when the counts do not cover exactly height*width cells.
Mask rle_decode(const Rle& rle);

/// JSON object {"size": [Y, X], "counts": [...]}.
nlohmann::json rle_to_json(const Rle& rle);
Rle rle_from_json(const nlohmann::json& j);

struct MaskProposal {
  std::int64_t id = 0;
  Mask mask;  // image resolution, Y rows by X columns
};

/// Proposal file: JSON array of {"id": n, "rle": {...}}.
std::vector<MaskProposal> load_proposals(const std::filesystem::path& path);
void save_proposals(const std::filesystem::path& path, const std::vector<MaskProposal>& proposals);

}  // namespace refcam
