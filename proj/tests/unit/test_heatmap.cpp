#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "random.hpp"
#include "refcam/errors.hpp"
#include "refcam/heatmap.hpp"

using namespace refcam;
using testing_support::random_heatmap;
using testing_support::random_tensor;

namespace {

oracle::Stack to_stack(const Tensor3& a, const Tensor3& g) {
  oracle::Stack s;
  s.tokens = static_cast<int>(a.tokens());
  s.h = static_cast<int>(a.height());
  s.w = static_cast<int>(a.width());
  s.a.assign(a.values().begin(), a.values().end());
  s.g.assign(g.values().begin(), g.values().end());
  return s;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_CASE("compose_gradcam clamps negative gradients") {
  CHECK(compose_gradcam(Tensor3(1, 1, 1, {0.5}), Tensor3(1, 1, 1, {-1.0}))(0, 0, 0) == 0.0);
  CHECK(compose_gradcam(Tensor3(1, 1, 1, {0.5}), Tensor3(1, 1, 1, {2.0}))(0, 0, 0) == 1.0);
}

TEST_CASE("compose_gradcam matches the triple loop on a random 3x4x4 pair") {
  const Tensor3 a = random_tensor(3, 4, 4, 0.0, 1.0);
  const Tensor3 g = random_tensor(3, 4, 4, -1.0, 1.0);
  const Tensor3 h = compose_gradcam(a, g);
  const auto expected = oracle::gradcam(to_stack(a, g));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(h.values()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(h.values()[i] >= 0.0);
  }
}

TEST_CASE("compose_gradcam rejects mismatched shapes") {
  CHECK_THROWS_AS(compose_gradcam(Tensor3(1, 2, 2), Tensor3(1, 2, 3)), ShapeError);
}

TEST_CASE("mean_over_tokens") {
  SUBCASE("a single token is returned unchanged") {
    const Tensor3 t = random_tensor(1, 3, 3, 0.0, 1.0);
    const Heatmap m = mean_over_tokens(t);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == t.values()[i]);
  }
  SUBCASE("two tokens") {
    CHECK(mean_over_tokens(Tensor3(2, 1, 1, {0.0, 2.0}))(0, 0) == 1.0);
  }
  SUBCASE("random 5x3x3 against the loop oracle") {
    const Tensor3 t = random_tensor(5, 3, 3, 0.0, 1.0);
    const Heatmap m = mean_over_tokens(t);
    const auto expected = oracle::token_mean({t.values().begin(), t.values().end()}, 5, 3, 3);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  }
  SUBCASE("an empty stack is an error") { CHECK_THROWS_AS(mean_over_tokens(Tensor3(0, 2, 2)), InputError); }
}

TEST_CASE("center_sigmoid") {
  SUBCASE("constant map gives exactly one half") {
    const Heatmap out = center_sigmoid(Heatmap(3, 3, 7.25));
    for (double v : out.values()) CHECK(v == 0.5);
  }
  SUBCASE("analytic values") {
    const Heatmap out = center_sigmoid(Heatmap(1, 2, {-1.0, 1.0}));
    CHECK(out(0, 0) == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(out(0, 1) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  }
  SUBCASE("order preserving and crosses one half at the mean") {
    const Heatmap in = random_heatmap(4, 4, -2.0, 2.0);
    const Heatmap out = center_sigmoid(in);
    double mean = 0;
    for (double v : in.values()) mean += v;
    mean /= 16.0;
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = 0; j < 16; ++j) {
        if (in[i] < in[j]) CHECK(out[i] < out[j]);
      }
      if (in[i] > mean) CHECK(out[i] > 0.5);
      if (in[i] < mean) CHECK(out[i] < 0.5);
      CHECK(out[i] > 0.0);
      CHECK(out[i] < 1.0);
    }
  }
}

TEST_CASE("threshold_drop_mask") {
  SUBCASE("equality falls in the drop branch") {
    const Mask m = threshold_drop_mask(Heatmap(2, 3, 1.0), 0.5);
    for (auto v : m.values()) CHECK(v == 0);
  }
  SUBCASE("two cells") {
    const Mask m = threshold_drop_mask(Heatmap(1, 2, {-3.0, 3.0}), 0.5);
    CHECK(m(0, 0) == 1);
    CHECK(m(0, 1) == 0);
  }
  SUBCASE("zeros exactly where the centered value is non-negative") {
    const Heatmap in = random_heatmap(6, 5, -1.0, 1.0);
    const Mask m = threshold_drop_mask(in, 0.5);
    double mean = 0;
    for (double v : in.values()) mean += v;
    mean /= static_cast<double>(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) CHECK((m[i] == 0) == (in[i] - mean >= 0.0));
  }
  SUBCASE("the argmax is dropped for any theta up to sigma(max - mean)") {
    const Heatmap in = random_heatmap(5, 5, 0.0, 3.0);
    double mean = 0, top = in[0];
    for (double v : in.values()) {
      mean += v;
      top = std::max(top, v);
    }
    mean /= 25.0;
    for (double theta : {0.1, 0.3, sigmoid(top - mean) - 1e-12}) {
      const Mask m = threshold_drop_mask(in, theta);
      for (const Coord c : argmax_coords(in, 0.0)) CHECK(m(c.y, c.x) == 0);
    }
  }
  SUBCASE("theta outside (0, 1) is a configuration error") {
    CHECK_THROWS_AS(threshold_drop_mask(Heatmap(1, 1), 0.0), ConfigError);
    CHECK_THROWS_AS(threshold_drop_mask(Heatmap(1, 1), 1.0), ConfigError);
  }
}

TEST_CASE("bilinear_upsample") {
  SUBCASE("1x1 map is constant") {
    const Heatmap out = bilinear_upsample(Heatmap(1, 1, 0.375), 5, 3);
    CHECK(out.width() == 5);
    CHECK(out.height() == 3);
    for (double v : out.values()) CHECK(v == 0.375);
  }
  SUBCASE("2x2 to 3x3 puts the corner mean in the middle") {
    const Heatmap out = bilinear_upsample(Heatmap(2, 2, {0.0, 1.0, 2.0, 4.0}), 3, 3);
    CHECK(out(1, 1) == doctest::Approx(1.75));
    CHECK(out(0, 0) == 0.0);
    CHECK(out(2, 2) == 4.0);
    CHECK(out(0, 1) == doctest::Approx(0.5));
  }
  SUBCASE("identity at the same size") {
    const Heatmap in = random_heatmap(4, 7);
    CHECK(bilinear_upsample(in, 7, 4) == in);
  }
  SUBCASE("bounded by the input range") {
    for (int trial = 0; trial < 20; ++trial) {
      const Heatmap in = random_heatmap(4, 4, -1.0, 1.0);
      const auto [lo, hi] = std::minmax_element(in.values().begin(), in.values().end());
      const Heatmap out = bilinear_upsample(in, 37, 23);
      for (double v : out.values()) {
        CHECK(v >= *lo);
        CHECK(v <= *hi);
      }
    }
  }
}

TEST_CASE("argmax_coords") {
  SUBCASE("exact tie returns both cells as (x, y)") {
    const auto peaks = argmax_coords(Heatmap(2, 2, {1.0, 2.0, 2.0, 0.0}), 0.0);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0] == Coord{1, 0});
    CHECK(peaks[1] == Coord{0, 1});
  }
  SUBCASE("constant map returns every cell") { CHECK(argmax_coords(Heatmap(3, 4, 0.2)).size() == 12); }
  SUBCASE("unique maximum is a singleton") {
    Heatmap in = random_heatmap(6, 6);
    in(4, 2) = 2.0;
    const auto peaks = argmax_coords(in, 1e-9);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == Coord{2, 4});
  }
  SUBCASE("tolerance widens the set") {
    const auto peaks = argmax_coords(Heatmap(1, 3, {1.0, 1.0 - 1e-10, 0.5}));
    CHECK(peaks.size() == 2);
  }
}
