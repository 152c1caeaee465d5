#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "refcam/backend.hpp"

namespace refcam {

/// Isotropic Gaussian object on the latent grid.
struct Blob {
  double center_x = 0.0;  // latent column coordinate
  double center_y = 0.0;  // latent row coordinate
  double sigma = 1.0;     // latent cells
  double salience = 1.0;  // (0, 1]
  std::vector<std::string> tags;        // lemmas whose attention lands on this blob
  std::vector<std::string> qualifiers;  // lemmas the blob satisfies for ITM only (e.g. "left")
  double distractor_bias = 1.0;         // attention gain, applied only with an all-ones mask
};

/// Deterministic stand-in for a cross-attention model.
///
/// Attention for a token is the normalized sum of the Gaussians of every blob
/// tagged with the token's lemma (a uniform 1e-4 floor when no blob matches).
/// Gradients are attention * (2 s - 1) with s the salience of the strongest
/// contributor at that cell, so weak blobs and unmatched tokens carry negative
/// gradient. ITM is purity * coverage over blobs matching any request token:
/// purity weighs visible evidence by how many request qualifiers each blob
/// satisfies, coverage is the visible fraction of the best-agreeing blobs.
struct SyntheticScene {
  std::string image;
  std::size_t image_width = 0;
  std::size_t image_height = 0;
  LatentShape latent;
  std::vector<Blob> blobs;

  void validate() const;
};

inline constexpr double kUnmatchedAttentionFloor = 1e-4;

BackendResponse synthetic_forward(const SyntheticScene& scene, const BackendRequest& request);

nlohmann::json scene_to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const nlohmann::json& j);

/// Reads a scene file holding one scene object or an array of them.
std::vector<SyntheticScene> load_scenes(const std::filesystem::path& path);

class SyntheticBackend : public Backend {
 public:
  explicit SyntheticBackend(std::vector<SyntheticScene> scenes);

  LatentShape latent_shape(const std::string& image) override;
  BackendResponse forward(const BackendRequest& request) override;

  const SyntheticScene& scene(const std::string& image) const;

 private:
  std::map<std::string, SyntheticScene> scenes_;
};

}  // namespace refcam
