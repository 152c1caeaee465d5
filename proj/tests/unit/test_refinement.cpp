#include "doctest.h"
#include "fake_backends.hpp"
#include "oracles.hpp"
#include "random.hpp"
#include "refcam/errors.hpp"
#include "refcam/fixtures.hpp"
#include "refcam/heatmap.hpp"
#include "refcam/refinement.hpp"
#include "refcam/synthetic.hpp"

using namespace refcam;
using testing_support::random_heatmap;

TEST_CASE("update_heatmap") {
  SUBCASE("zero previous and constant current") {
    const Heatmap out = update_heatmap(Heatmap(3, 3, 0.0), Heatmap(3, 3, 4.0), 0.8);
    for (double v : out.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("lambda 1 keeps the previous map") {
    const Heatmap prev = random_heatmap(4, 4);
    CHECK(update_heatmap(prev, random_heatmap(4, 4, -5, 5), 1.0) == prev);
  }
  SUBCASE("random pairs against the oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const Heatmap prev = random_heatmap(5, 7);
      const Heatmap cur = random_heatmap(5, 7, -3, 3);
      const double lambda = testing_support::uniform(0, 1);
      const Heatmap out = update_heatmap(prev, cur, lambda);
      const auto expected = oracle::blend({prev.values().begin(), prev.values().end()},
                                          {cur.values().begin(), cur.values().end()}, lambda);
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-9));
        CHECK(out[i] >= 0.0);
        CHECK(out[i] <= 1.0);
      }
    }
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(update_heatmap(Heatmap(2, 2), Heatmap(2, 3), 0.5), ShapeError); }
}

TEST_CASE("update_mask") {
  CHECK(update_mask(Mask(3, 3, 1), Heatmap(3, 3, 2.0), 0.5) == Mask(3, 3, 0));
  CHECK(update_mask(Mask(3, 3, 0), random_heatmap(3, 3), 0.5) == Mask(3, 3, 0));
  SUBCASE("zero-set only grows") {
    Mask m(6, 6, 1);
    for (int step = 0; step < 3; ++step) {
      const Mask next = update_mask(m, random_heatmap(6, 6), 0.5);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) CHECK(next[i] == 0);
      }
      m = next;
    }
  }
  CHECK_THROWS_AS(update_mask(Mask(2, 2, 1), Heatmap(3, 2), 0.5), ShapeError);
}

TEST_CASE("relevance_score and soft_itm") {
  CHECK(relevance_score(Heatmap(4, 5, 0.0)) == 1.0);
  CHECK(relevance_score(Heatmap(4, 5, 1.0)) == 0.0);
  CHECK(relevance_score(Heatmap(2, 2, {1.0, 0.0, 0.0, 1.0})) == 0.5);
  const Heatmap h = random_heatmap(9, 11);
  CHECK(relevance_score(h) == doctest::Approx(oracle::overlooked({h.values().begin(), h.values().end()})));

  CHECK(soft_itm(0.9, 1.0) == doctest::Approx(0.9));
  CHECK(soft_itm(0.37, 0.0) == 0.0);
  CHECK(soft_itm(0.8, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("request tokens carry the prompt prefix and map back to parsed indices") {
  const auto parsed = parse_expression("the right bike");
  const auto tokens = build_request_tokens(parsed, "there is a");
  CHECK(tokens == std::vector<std::string>{"[CLS]", "there", "is", "a", "the", "right", "bike"});
  const auto map = build_token_map(parsed, "there is a");
  CHECK(map == std::vector<std::size_t>{0, 4, 5, 6});
  CHECK(build_token_map(parsed, "") == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("configuration validation") {
  RefinementConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.lambda = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.theta = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("a single pass makes one call and returns (1 - lambda) times the centred sigmoid") {
  SyntheticBackend backend(fixtures::scenes());
  const auto parsed = parse_expression("a brown dog");
  RefinementConfig cfg;
  cfg.max_iterations = 1;
  const auto state = run_refinement(backend, parsed, {"dog", 76, 76}, cfg);
  CHECK(state.backend_calls == 1);
  CHECK(state.t == 1);
  CHECK_FALSE(state.stopped_by_score);
  REQUIRE(state.trace.size() == 1);
  const Heatmap expected = center_sigmoid(state.trace[0].gradcam);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(state.refined[i] == doctest::Approx(0.2 * expected[i]));
  CHECK(state.trace[0].relevance == 1.0);
}

TEST_CASE("constant outputs stop the loop at t = 2 with the first state") {
  const Tensor3 a = testing_support::random_tensor(1, 6, 6, 0.0, 1.0 / 36.0);
  const Tensor3 g = testing_support::random_tensor(1, 6, 6, -0.5, 1.0);
  testing_support::ConstantBackend backend(a, g, 0.9);
  const auto parsed = parse_expression("the red car");
  const auto state = run_refinement(backend, parsed, {"img", 8, 8}, RefinementConfig{});
  CHECK(backend.calls == 2);
  CHECK(state.stopped_by_score);
  CHECK(state.t == 1);
  REQUIRE(state.trace.size() == 2);
  CHECK(state.trace[1].score < state.trace[0].score);
  CHECK_FALSE(state.trace[1].committed);
  CHECK(state.refined == state.trace[0].refined);
  CHECK(state.cumulative_mask == state.trace[0].cumulative_mask);
  CHECK(state.scores == std::vector<double>{state.trace[0].score});
}

TEST_CASE("the two-bike scene moves its peak from the distractor to the referent") {
  SyntheticBackend backend(fixtures::scenes());
  const auto parsed = parse_expression("the right bike");
  const auto state = run_refinement(backend, parsed, {"bikes", 76, 76}, RefinementConfig{});
  REQUIRE(state.trace.size() >= 2);
  CHECK(argmax_coords(state.trace[0].gradcam).front().x < 8);
  CHECK(argmax_coords(state.trace[1].gradcam).front().x >= 8);
  CHECK(state.t == 2);
  CHECK(argmax_coords(state.refined).front().x >= 8);
}

TEST_CASE("the mask sent at iteration t is the cumulative mask of t - 1") {
  SyntheticBackend inner(fixtures::scenes());
  testing_support::ProxyBackend proxy(inner, [](std::size_t, BackendResponse&) {});
  const auto state = run_refinement(proxy, parse_expression("the right bike"), {"bikes", 76, 76}, {});
  REQUIRE(proxy.requests.size() == state.backend_calls);
  CHECK(proxy.requests[0].attention_mask == Mask(16, 16, 1));
  for (std::size_t t = 1; t < proxy.requests.size(); ++t) {
    CHECK(proxy.requests[t].attention_mask == state.trace[t - 1].cumulative_mask);
  }
}

TEST_CASE("lambda 1 keeps the refined map at zero") {
  SyntheticBackend backend(fixtures::scenes());
  RefinementConfig cfg;
  cfg.lambda = 1.0;
  const auto state = run_refinement(backend, parse_expression("a brown dog"), {"dog", 76, 76}, cfg);
  CHECK(state.refined == Heatmap(16, 16, 0.0));
}

TEST_CASE("backend failures carry the iteration number and keep their class") {
  SyntheticBackend inner(fixtures::scenes());
  SUBCASE("invariant violation on the second call") {
    testing_support::ProxyBackend proxy(inner, [](std::size_t call, BackendResponse& r) {
      if (call == 2) r.attention.values()[0] = -1.0;
    });
    try {
      run_refinement(proxy, parse_expression("the right bike"), {"bikes", 76, 76}, {});
      FAIL("expected an exception");
    } catch (const InvariantViolationError& e) {
      CHECK(std::string(e.what()).find("iteration 2") != std::string::npos);
    }
  }
  SUBCASE("timeout") {
    testing_support::ProxyBackend proxy(inner, [](std::size_t, BackendResponse&) {
      throw TimeoutError("no reply");
    });
    CHECK_THROWS_AS(run_refinement(proxy, parse_expression("a dog"), {"dog", 76, 76}, {}), TimeoutError);
  }
  SUBCASE("plain transport failure") {
    testing_support::ProxyBackend proxy(inner, [](std::size_t, BackendResponse&) {
      throw TransportError("reset");
    });
    CHECK_THROWS_WITH_AS(run_refinement(proxy, parse_expression("a dog"), {"dog", 76, 76}, {}),
                         "iteration 1: reset", TransportError);
  }
}
