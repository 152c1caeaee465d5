#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "random.hpp"
#include "refcam/errors.hpp"
#include "refcam/rle.hpp"

using namespace refcam;

TEST_CASE("rle encodes row-major runs starting with zeros") {
  Mask m(2, 3, {1, 1, 0, 0, 1, 1});
  const Rle r = rle_encode(m);
  CHECK(r.height == 2);
  CHECK(r.width == 3);
  CHECK(r.counts == std::vector<std::uint64_t>{0, 2, 2, 2});
  CHECK(rle_encode(Mask(2, 2)).counts == std::vector<std::uint64_t>{4});
  CHECK(rle_to_json(r) == nlohmann::json::parse(R"({"size":[2,3],"counts":[0,2,2,2]})"));
}

TEST_CASE("rle round trips random masks") {
  for (int trial = 0; trial < 50; ++trial) {
    const Mask m = testing_support::random_mask(testing_support::pick(1, 20), testing_support::pick(1, 20), 0.5);
    CHECK(rle_decode(rle_encode(m)) == m);
    CHECK(rle_from_json(rle_to_json(rle_encode(m))) == rle_encode(m));
  }
}

TEST_CASE("rle decode rejects counts that do not cover the grid") {
  CHECK_THROWS_AS(rle_decode(Rle{2, 2, {1, 2}}), InputError);
  CHECK_THROWS_AS(rle_decode(Rle{2, 2, {3, 2}}), InputError);
  CHECK_THROWS_AS(rle_from_json(nlohmann::json::parse(R"({"size":[2],"counts":[4]})")), InputError);
}

TEST_CASE("proposal files") {
  const auto path = std::filesystem::temp_directory_path() / "refcam_proposals_test.json";
  const std::vector<MaskProposal> proposals{{4, testing_support::random_mask(5, 6, 0.5)}, {9, Mask(5, 6, 1)}};
  save_proposals(path, proposals);
  const auto back = load_proposals(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == 4);
  CHECK(back[0].mask == proposals[0].mask);
  CHECK(back[1].mask == proposals[1].mask);

  {
    std::ofstream out(path);
    out << R"([{"id":1,"rle":{"size":[2,2],"counts":[4]}},{"id":1,"rle":{"size":[2,2],"counts":[4]}}])";
  }
  CHECK_THROWS_AS(load_proposals(path), InputError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_proposals(path), InputError);
}
