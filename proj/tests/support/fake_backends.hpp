#pragma once

#include <functional>
#include <utility>

#include "refcam/backend.hpp"
#include "refcam/errors.hpp"

namespace testing_support {

/// Returns the same tensors and ITM for every request, masked in feature mode.
class ConstantBackend : public refcam::Backend {
 public:
  ConstantBackend(refcam::Tensor3 attention, refcam::Tensor3 gradients, double itm)
      : attention_(std::move(attention)), gradients_(std::move(gradients)), itm_(itm) {}

  refcam::LatentShape latent_shape(const std::string&) override {
    return {attention_.height(), attention_.width()};
  }

  refcam::BackendResponse forward(const refcam::BackendRequest& request) override {
    ++calls;
    refcam::BackendResponse r;
    const std::size_t n = request.tokens.size();
    r.attention = refcam::Tensor3(0, attention_.height(), attention_.width());
    r.gradients = r.attention;
    for (std::size_t k = 0; k < n; ++k) {
      r.attention.push_row(attention_.row(k % attention_.tokens()));
      r.gradients.push_row(gradients_.row(k % gradients_.tokens()));
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < request.attention_mask.size(); ++i) {
        if (request.attention_mask[i] == 0) {
          r.attention.values()[k * request.attention_mask.size() + i] = 0.0;
          r.gradients.values()[k * request.attention_mask.size() + i] = 0.0;
        }
      }
    }
    r.itm = itm_;
    r.latent = latent_shape(request.image);
    r.image_width = 8;
    r.image_height = 8;
    return r;
  }

  std::size_t calls = 0;

 private:
  refcam::Tensor3 attention_;
  refcam::Tensor3 gradients_;
  double itm_;
};

/// Forwards to another backend, optionally rewriting each response.
class ProxyBackend : public refcam::Backend {
 public:
  using Hook = std::function<void(std::size_t call, refcam::BackendResponse&)>;
  ProxyBackend(refcam::Backend& inner, Hook hook) : inner_(inner), hook_(std::move(hook)) {}

  refcam::LatentShape latent_shape(const std::string& image) override { return inner_.latent_shape(image); }
  refcam::BackendResponse forward(const refcam::BackendRequest& request) override {
    requests.push_back(request);
    auto r = inner_.forward(request);
    hook_(requests.size(), r);
    return r;
  }

  std::vector<refcam::BackendRequest> requests;

 private:
  refcam::Backend& inner_;
  Hook hook_;
};

}  // namespace testing_support
