#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "refcam/dataset.hpp"
#include "refcam/rle.hpp"
#include "refcam/synthetic.hpp"

namespace refcam::fixtures {

// Bundled synthetic fixtures. Every scene uses a 16x16 latent grid and a 64x64
// image, so latent coordinate c maps exactly onto image pixel 5c.

inline constexpr std::size_t kLatentSide = 16;
inline constexpr std::size_t kImageSide = 76;

/// Two bikes on one row. The left one is larger, more salient and carries a
/// 1.5 attention bias with an unmasked image; the right one is the usual referent.
SyntheticScene two_bikes_scene();
/// A single brown dog.
SyntheticScene dog_scene();
std::vector<SyntheticScene> scenes();

/// Filled disk at image resolution.
Mask disk(std::size_t width, std::size_t height, double cx, double cy, double radius);

Mask left_bike_mask();
Mask right_bike_mask();
Mask dog_mask();

/// Proposals for the two-bike image: left disk (1), right disk (2), background (3),
/// right disk plus 12 specks (4), empty (5).
std::vector<MaskProposal> two_bikes_proposals();
/// Proposals for the dog image: dog disk (1), background (2), a corner square (3), empty (4).
std::vector<MaskProposal> dog_proposals();

/// In-memory dataset record whose proposal path is relative to the fixture directory.
EvalRecord make_record(const std::string& sample_id, const SyntheticScene& scene,
                       const std::string& expression, const std::string& proposals,
                       const Mask& gt, std::vector<std::string> split_tags = {});

/// "the right bike": the sample where a single pass lands on the distractor.
std::vector<EvalRecord> self_correction_dataset();
/// "the left bike" and "a brown dog".
std::vector<EvalRecord> pipeline_dataset();

/// Three 4x4 samples with known overlap counts for metric checks.
struct MetricsFixture {
  std::vector<EvalRecord> records;
  std::map<std::string, Mask> predictions;
  std::vector<MaskProposal> proposals;  // the predicted masks, stored as proposals
};
MetricsFixture metrics_fixture();

/// Writes scenes.json, the datasets, proposal files, metric predictions and
/// tensor dumps into dir, returning the written paths (relative to dir).
std::vector<std::filesystem::path> write_fixtures(const std::filesystem::path& dir);

}  // namespace refcam::fixtures
