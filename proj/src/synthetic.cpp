#include "refcam/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "refcam/errors.hpp"
#include "refcam/expression.hpp"

namespace refcam {

namespace {

using nlohmann::json;

double gaussian(const Blob& blob, std::size_t y, std::size_t x) {
  const double dx = static_cast<double>(x) - blob.center_x;
  const double dy = static_cast<double>(y) - blob.center_y;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * blob.sigma * blob.sigma));
}

std::string token_lemma(const std::string& token) {
  std::string lowered(token);
  std::ranges::transform(lowered, lowered.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return Lexicon::builtin().lemmatize(lowered);
}

bool contains(const std::vector<std::string>& list, const std::string& v) {
  return std::ranges::find(list, v) != list.end();
}

bool blob_visible_in_image_mode(const Blob& blob, const Mask& mask) {
  const auto clamp_index = [](double c, std::size_t n) {
    const double r = std::round(c);
    if (r < 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(r), n - 1);
  };
  return mask(clamp_index(blob.center_y, mask.height()),
              clamp_index(blob.center_x, mask.width())) != 0;
}

}  // namespace

void SyntheticScene::validate() const {
  if (image.empty()) throw InputError("scene has no image id");
  if (image_width == 0 || image_height == 0) throw InputError("scene image size must be >= 1");
  if (latent.height == 0 || latent.width == 0) throw InputError("scene latent grid must be >= 1");
  if (blobs.empty()) throw InputError("scene '" + image + "' has no blobs");
  for (const auto& b : blobs) {
    if (!(b.sigma > 0.0)) throw InputError("blob sigma must be positive");
    if (!(b.salience > 0.0 && b.salience <= 1.0)) throw InputError("blob salience must be in (0,1]");
    if (!(b.distractor_bias > 0.0)) throw InputError("distractor bias must be positive");
    if (b.tags.empty()) throw InputError("blob needs at least one tag");
  }
}

BackendResponse synthetic_forward(const SyntheticScene& scene, const BackendRequest& request) {
  const std::size_t h = scene.latent.height;
  const std::size_t w = scene.latent.width;
  const Mask& mask = request.attention_mask;
  if (request.tokens.empty()) throw InputError("backend request has no tokens");
  if (mask.height() != h || mask.width() != w) {
    throw ShapeError("attention mask does not match the scene latent grid");
  }
  const bool feature_mode = request.mask_mode == MaskMode::Feature;
  const bool unmasked = std::ranges::all_of(mask.values(), [](auto v) { return v != 0; });

  auto cell_visible = [&](std::size_t i) { return !feature_mode || mask[i] != 0; };
  std::vector<bool> blob_visible(scene.blobs.size(), true);
  if (!feature_mode) {
    for (std::size_t b = 0; b < scene.blobs.size(); ++b) {
      blob_visible[b] = blob_visible_in_image_mode(scene.blobs[b], mask);
    }
  }

  std::vector<std::string> lemmas;
  lemmas.reserve(request.tokens.size());
  for (const auto& t : request.tokens) lemmas.push_back(token_lemma(t));

  BackendResponse out;
  out.latent = scene.latent;
  out.image_width = scene.image_width;
  out.image_height = scene.image_height;
  out.attention = Tensor3(request.tokens.size(), h, w);
  out.gradients = Tensor3(request.tokens.size(), h, w);

  std::vector<double> raw(h * w);
  std::vector<double> strongest(h * w);
  std::vector<double> strongest_salience(h * w);
  for (std::size_t k = 0; k < lemmas.size(); ++k) {
    std::ranges::fill(raw, 0.0);
    std::ranges::fill(strongest, 0.0);
    std::ranges::fill(strongest_salience, 0.0);
    bool matched = false;
    for (std::size_t b = 0; b < scene.blobs.size(); ++b) {
      const Blob& blob = scene.blobs[b];
      if (!contains(blob.tags, lemmas[k])) continue;
      matched = true;
      if (!blob_visible[b]) continue;
      const double gain = blob.salience * (unmasked ? blob.distractor_bias : 1.0);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t i = y * w + x;
          if (!cell_visible(i)) continue;
          const double c = gain * gaussian(blob, y, x);
          raw[i] += c;
          if (c > strongest[i]) {
            strongest[i] = c;
            strongest_salience[i] = blob.salience;
          }
        }
      }
    }
    if (!matched) {
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (cell_visible(i)) raw[i] = kUnmatchedAttentionFloor;
      }
    }
    double total = 0.0;
    for (double v : raw) total += v;
    auto attention = out.attention.row(k);
    auto gradients = out.gradients.row(k);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double a = total > 0.0 ? raw[i] / total : 0.0;
      attention[i] = a;
      gradients[i] = a == 0.0 ? 0.0 : a * (2.0 * strongest_salience[i] - 1.0);
    }
  }

  // ITM: qualifier agreement per blob, then purity * coverage over matching blobs.
  std::set<std::string> request_qualifiers;
  for (const auto& blob : scene.blobs) {
    for (const auto& q : blob.qualifiers) {
      if (contains(lemmas, q)) request_qualifiers.insert(q);
    }
  }
  double weighted_visible = 0.0;
  double visible_total = 0.0;
  double best_agreement = -1.0;
  double best_visible = 0.0;
  double best_full = 0.0;
  for (std::size_t b = 0; b < scene.blobs.size(); ++b) {
    const Blob& blob = scene.blobs[b];
    const bool relevant =
        std::ranges::any_of(blob.tags, [&](const std::string& t) { return contains(lemmas, t); });
    if (!relevant) continue;
    std::size_t satisfied = 0;
    for (const auto& q : request_qualifiers) satisfied += contains(blob.qualifiers, q) ? 1 : 0;
    const double agreement = static_cast<double>(satisfied + 1) /
                             static_cast<double>(request_qualifiers.size() + 1);
    double full = 0.0;
    double visible = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double g = blob.salience * gaussian(blob, y, x);
        full += g;
        if (blob_visible[b] && cell_visible(y * w + x)) visible += g;
      }
    }
    weighted_visible += agreement * visible;
    visible_total += visible;
    if (agreement > best_agreement) {
      best_agreement = agreement;
      best_visible = 0.0;
      best_full = 0.0;
    }
    if (agreement == best_agreement) {
      best_visible += visible;
      best_full += full;
    }
  }
  const double purity = visible_total > 0.0 ? weighted_visible / visible_total : 0.0;
  const double coverage = best_full > 0.0 ? best_visible / best_full : 0.0;
  out.itm = std::clamp(purity * coverage, 0.0, 1.0);
  return out;
}

json scene_to_json(const SyntheticScene& scene) {
  json blobs = json::array();
  for (const auto& b : scene.blobs) {
    blobs.push_back({{"center", {b.center_x, b.center_y}},
                     {"sigma", b.sigma},
                     {"salience", b.salience},
                     {"tags", b.tags},
                     {"qualifiers", b.qualifiers},
                     {"distractor_bias", b.distractor_bias}});
  }
  return {{"image", scene.image},
          {"image_size", {scene.image_width, scene.image_height}},
          {"latent", {scene.latent.height, scene.latent.width}},
          {"blobs", blobs}};
}

SyntheticScene scene_from_json(const json& j) {
  try {
    SyntheticScene scene;
    scene.image = j.at("image").get<std::string>();
    scene.image_width = j.at("image_size").at(0).get<std::size_t>();
    scene.image_height = j.at("image_size").at(1).get<std::size_t>();
    scene.latent = {j.at("latent").at(0).get<std::size_t>(), j.at("latent").at(1).get<std::size_t>()};
    for (const auto& jb : j.at("blobs")) {
      Blob b;
      b.center_x = jb.at("center").at(0).get<double>();
      b.center_y = jb.at("center").at(1).get<double>();
      b.sigma = jb.at("sigma").get<double>();
      b.salience = jb.at("salience").get<double>();
      b.tags = jb.at("tags").get<std::vector<std::string>>();
      b.qualifiers = jb.value("qualifiers", std::vector<std::string>{});
      b.distractor_bias = jb.value("distractor_bias", 1.0);
      scene.blobs.push_back(std::move(b));
    }
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scene: ") + e.what());
  }
}

std::vector<SyntheticScene> load_scenes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  std::vector<SyntheticScene> scenes;
  if (j.is_array()) {
    for (const auto& item : j) scenes.push_back(scene_from_json(item));
  } else {
    scenes.push_back(scene_from_json(j));
  }
  return scenes;
}

SyntheticBackend::SyntheticBackend(std::vector<SyntheticScene> scenes) {
  for (auto& s : scenes) {
    s.validate();
    auto id = s.image;
    if (!scenes_.emplace(std::move(id), std::move(s)).second) {
      throw InputError("duplicate scene image id");
    }
  }
}

const SyntheticScene& SyntheticBackend::scene(const std::string& image) const {
  const auto it = scenes_.find(image);
  if (it == scenes_.end()) throw UnknownImageError("unknown image '" + image + "'");
  return it->second;
}

LatentShape SyntheticBackend::latent_shape(const std::string& image) {
  return scene(image).latent;
}

BackendResponse SyntheticBackend::forward(const BackendRequest& request) {
  return synthetic_forward(scene(request.image), request);
}

}  // namespace refcam
