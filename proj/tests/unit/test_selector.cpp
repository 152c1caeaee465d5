#include "doctest.h"
#include "oracles.hpp"
#include "random.hpp"
#include "refcam/errors.hpp"
#include "refcam/fixtures.hpp"
#include "refcam/selector.hpp"

using namespace refcam;

namespace {

std::vector<std::uint8_t> bits(const Mask& m) { return {m.values().begin(), m.values().end()}; }

Mask from_rows(const std::vector<std::string>& rows) {
  Mask m(rows.size(), rows[0].size());
  for (std::size_t y = 0; y < rows.size(); ++y)
    for (std::size_t x = 0; x < rows[y].size(); ++x) m(y, x) = rows[y][x] == '#';
  return m;
}

}  // namespace

TEST_CASE("connected_components") {
  CHECK(connected_components(Mask(5, 5)) == 0);
  CHECK(connected_components(from_rows({"#.", ".#"})) == 2);
  CHECK(connected_components(from_rows({"#.", ".#"}), Connectivity::Eight) == 1);
  CHECK(connected_components(from_rows({"##.#", "..##", "#...", "#.##"})) == 4);
  CHECK(connected_components(Mask(7, 3, 1)) == 1);

  SUBCASE("random masks agree with flood fill") {
    for (int trial = 0; trial < 200; ++trial) {
      const Mask m = testing_support::random_mask(16, 16, testing_support::uniform(0.1, 0.7));
      CHECK(connected_components(m) == static_cast<std::size_t>(oracle::flood_fill_count(bits(m), 16, 16)));
      CHECK(connected_components(m, Connectivity::Eight) ==
            static_cast<std::size_t>(oracle::flood_fill_count(bits(m), 16, 16, true)));
    }
  }
  CHECK_THROWS_AS(connectivity_from_int(6), ConfigError);
}

TEST_CASE("filter_proposals") {
  const Mask big(10, 10, 1);
  Mask specks(10, 10);
  for (std::size_t i = 0; i < 13; ++i) specks(2 * (i / 5), 2 * (i % 5)) = 1;
  REQUIRE(connected_components(specks) == 13);
  Mask corner(10, 10);
  corner(0, 0) = 1;
  const std::vector<MaskProposal> proposals{{1, big}, {2, specks}, {3, corner}, {4, Mask(10, 10)}};
  const std::vector<Coord> peak{{5, 5}};
  specks(5, 5) = 1;

  const auto r = filter_proposals(proposals, peak, 12);
  CHECK(r.candidates == std::vector<std::int64_t>{1});
  CHECK(r.filtered_out.at(3) == FilterReason::NoPeakCoverage);
  CHECK(r.filtered_out.at(4) == FilterReason::Empty);
  CHECK(r.filtered_out.at(2) == FilterReason::NoPeakCoverage);

  const std::vector<MaskProposal> covering{{7, specks}};
  CHECK(filter_proposals(covering, peak, 12).filtered_out.at(7) == FilterReason::TooFragmented);
  CHECK(filter_proposals(covering, peak, 14).candidates == std::vector<std::int64_t>{7});
  CHECK(to_string(FilterReason::TooFragmented) == "too-fragmented");
}

TEST_CASE("score_proposals") {
  const std::vector<MaskProposal> proposals{{1, Mask(2, 2, 1)}, {2, from_rows({"#.", "..", })}};
  const std::vector<std::int64_t> ids{1, 2};
  for (const auto& [id, z] : score_proposals(proposals, ids, Heatmap(2, 2, 0.0))) CHECK(z == 1.0);
  for (const auto& [id, z] : score_proposals(proposals, ids, Heatmap(2, 2, 1.0))) CHECK(z == 2.0);

  const std::vector<MaskProposal> pair{{5, from_rows({"##", ".."})}};
  CHECK(score_proposals(pair, std::vector<std::int64_t>{5}, Heatmap(2, 2, {0.2, 0.8, 0.9, 0.9})).at(5) ==
        doctest::Approx(1.5));

  const std::vector<MaskProposal> empty{{9, Mask(2, 2)}};
  CHECK_THROWS_AS(score_proposals(empty, std::vector<std::int64_t>{9}, Heatmap(2, 2)), InternalError);

  SUBCASE("scores stay in [1, 2] and match the oracle") {
    for (int trial = 0; trial < 100; ++trial) {
      const Heatmap heat = testing_support::random_heatmap(12, 12);
      Mask m = testing_support::random_mask(12, 12, 0.4);
      m(0, 0) = 1;
      const std::vector<MaskProposal> one{{1, m}};
      const double z = score_proposals(one, std::vector<std::int64_t>{1}, heat).at(1);
      CHECK(z >= 1.0);
      CHECK(z <= 2.0);
      CHECK(z == doctest::Approx(oracle::normalized_score(bits(m), {heat.values().begin(), heat.values().end()})));
    }
  }
}

TEST_CASE("select_best") {
  CHECK(select_best(std::vector<std::int64_t>{3}, {{3, 1.2}}) == 3);
  CHECK(select_best(std::vector<std::int64_t>{1, 2}, {{1, 1.4}, {2, 1.7}}) == 2);
  CHECK(select_best(std::vector<std::int64_t>{2, 1}, {{1, 1.5}, {2, 1.5}}) == 1);
  CHECK_THROWS_AS(select_best(std::vector<std::int64_t>{}, {}), NoCandidateError);
}

TEST_CASE("select_mask relaxes in order when nothing passes") {
  Heatmap heat(6, 6, 0.1);
  heat(3, 3) = 0.9;
  Mask fragmented(6, 6);
  for (std::size_t y = 0; y < 6; y += 2)
    for (std::size_t x = 1; x < 6; x += 2) fragmented(y, x) = 1;
  fragmented(3, 3) = 1;
  Mask far(6, 6);
  far(0, 0) = 1;

  SelectorConfig cfg;
  cfg.kappa = 2;
  const std::vector<MaskProposal> first{{1, fragmented}, {2, far}};
  const auto a = select_mask(first, heat, cfg);
  CHECK(a.relaxation == Relaxation::DropKappa);
  CHECK(a.selected_id == 1);

  const std::vector<MaskProposal> second{{2, far}, {3, Mask(6, 6)}};
  const auto b = select_mask(second, heat, cfg);
  CHECK(b.relaxation == Relaxation::DropPeakCoverage);
  CHECK(b.selected_id == 2);
  CHECK(b.filtered_out.at(3) == FilterReason::Empty);

  const std::vector<MaskProposal> none{{3, Mask(6, 6)}};
  CHECK_FALSE(select_mask(none, heat, cfg).selected_id.has_value());
}

TEST_CASE("select_mask is permutation invariant and matches brute force on the fixtures") {
  auto check = [](std::vector<MaskProposal> proposals, const Heatmap& heat) {
    const auto result = select_mask(proposals, heat);
    std::vector<oracle::Proposal> plain;
    for (const auto& p : proposals) plain.push_back({p.id, bits(p.mask)});
    const auto expected =
        oracle::brute_force_select(plain, {heat.values().begin(), heat.values().end()},
                                   static_cast<int>(heat.height()), static_cast<int>(heat.width()), 12, 1e-9);
    CHECK(result.selected_id == expected.id);
    std::reverse(proposals.begin(), proposals.end());
    CHECK(select_mask(proposals, heat).selected_id == result.selected_id);
  };
  for (int trial = 0; trial < 20; ++trial) {
    check(fixtures::two_bikes_proposals(), testing_support::random_heatmap(76, 76));
    check(fixtures::dog_proposals(), testing_support::random_heatmap(76, 76));
  }
}
