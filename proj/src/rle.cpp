#include "refcam/rle.hpp"

#include <algorithm>
#include <fstream>

#include "refcam/errors.hpp"

namespace refcam {

using nlohmann::json;

Rle rle_encode(const Mask& mask) {
  Rle rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  for (std::uint8_t v : mask.values()) {
    const std::uint8_t bit = v != 0 ? 1 : 0;
    if (bit != current) {
      rle.counts.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  rle.counts.push_back(run);
  return rle;
}

Mask rle_decode(const Rle& rle) {
  const std::uint64_t total = static_cast<std::uint64_t>(rle.height) * rle.width;
  std::uint64_t covered = 0;
  for (auto c : rle.counts) {
    if (c > total - covered) throw InputError("RLE counts exceed the mask size");
    covered += c;
  }
  if (covered != total) throw InputError("RLE counts do not cover the mask");
  Mask mask(rle.height, rle.width);
  std::size_t at = 0;
  std::uint8_t bit = 0;
  for (auto c : rle.counts) {
    for (std::uint64_t i = 0; i < c; ++i) mask[at++] = bit;
    bit ^= 1;
  }
  return mask;
}

json rle_to_json(const Rle& rle) {
  return {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

Rle rle_from_json(const json& j) {
  try {
    Rle rle;
    rle.height = j.at("size").at(0).get<std::size_t>();
    rle.width = j.at("size").at(1).get<std::size_t>();
    rle.counts = j.at("counts").get<std::vector<std::uint64_t>>();
    return rle;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed RLE object: ") + e.what());
  }
}

std::vector<MaskProposal> load_proposals(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open proposal file " + path.string());
  std::vector<MaskProposal> proposals;
  try {
    const json j = json::parse(in);
    if (!j.is_array()) throw InputError(path.string() + ": proposal file must be a JSON array");
    for (const auto& item : j) {
      const auto id = item.at("id").get<std::int64_t>();
      if (std::ranges::find(proposals, id, &MaskProposal::id) != proposals.end()) {
        throw InputError(path.string() + ": duplicate proposal id " + std::to_string(id));
      }
      proposals.push_back({id, rle_decode(rle_from_json(item.at("rle")))});
    }
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return proposals;
}

void save_proposals(const std::filesystem::path& path, const std::vector<MaskProposal>& proposals) {
  json j = json::array();
  for (const auto& p : proposals) j.push_back({{"id", p.id}, {"rle", rle_to_json(rle_encode(p.mask))}});
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump() << '\n';
}

}  // namespace refcam
