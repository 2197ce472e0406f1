// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "rtlocr/decode.hpp"
#include "rtlocr/random.hpp"

using namespace rtlocr;

namespace {

// Posteriors whose argmax follows `path`, the winner carrying probability `peak`.
net::Posteriors one_hot(const std::vector<int>& path, int classes, double peak = 0.9) {
  net::Posteriors p = net::Posteriors::Constant(static_cast<int>(path.size()), classes, (1.0 - peak) / (classes - 1));
  for (size_t t = 0; t < path.size(); ++t) p(static_cast<int>(t), path[t]) = peak;
  return p;
}

const script::Codec kCodec(U"ab");  // a = 1, b = 2

}  // namespace

TEST_CASE("best-path worked examples") {
  // Latin letters are LTR, so display order equals logical order here.
  CHECK(decode::best_path_decode(one_hot({0, 0}, 3), kCodec).text.empty());
  CHECK(decode::best_path_decode(one_hot({1, 1, 0, 1}, 3), kCodec).text == U"aa");
  CHECK(decode::best_path_decode(one_hot({1, 2, 2, 0, 2}, 3), kCodec).text == U"abb");
}

TEST_CASE("ties go to the lowest label") {
  net::Posteriors p(2, 3);
  p << 0.4, 0.4, 0.2, 0.2, 0.4, 0.4;
  const auto runs = decode::argmax_runs(p);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].label == 0);
  CHECK(runs[1].label == 1);
}

TEST_CASE("rtl output comes back in logical order with frames and confidences") {
  const script::Codec codec(U"اب");  // alef = 1, beh = 2
  // Display order (left to right) beh, alef is logical alef, beh.
  const auto r = decode::best_path_decode(one_hot({2, 2, 0, 1}, 3, 0.8), codec);
  CHECK(r.text == U"اب");
  REQUIRE(r.frames.size() == 2);
  CHECK(r.frames[0] == std::pair{3, 4});
  CHECK(r.frames[1] == std::pair{0, 2});
  CHECK(r.confidence[0] == doctest::Approx(0.8));
  CHECK(r.mean_confidence() == doctest::Approx(0.8));
}

TEST_CASE("decoding random paths") {
  Rng rng(31);
  const script::Codec codec(U"abc");
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> path(rng.between(1, 30));
    for (int& p : path) p = static_cast<int>(rng.below(4));
    const auto post = one_hot(path, 4, rng.uniform(0.5, 1.0));
    const auto r = decode::best_path_decode(post, codec);

    std::u32string expected;
    for (int l : oracle::collapse(path)) expected += codec.character(l);
    CHECK(r.text == expected);
    CHECK(r.text.size() <= path.size());
    CHECK(r.confidence.size() == r.text.size());
    for (double c : r.confidence) CHECK((c > 0.0 && c <= 1.0));

    std::vector<int> longer = path;
    const size_t at = rng.below(path.size());
    longer.insert(longer.begin() + static_cast<long>(at), path[at]);
    CHECK(decode::best_path_decode(one_hot(longer, 4), codec).text == r.text);
  }
}
