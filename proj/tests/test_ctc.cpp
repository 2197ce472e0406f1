// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "rtlocr/ctc.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/random.hpp"

using namespace rtlocr;
using Labels = std::vector<script::Label>;

namespace {

Eigen::MatrixXd uniform(int frames, int classes) {
  return Eigen::MatrixXd::Constant(frames, classes, 1.0 / classes);
}

}  // namespace

TEST_CASE("single-path and enumerated worked examples") {
  Eigen::MatrixXd y(1, 2);
  y << 0.1, 0.9;
  CHECK(ctc::ctc_loss(y, Labels{1}).loss == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(ctc::ctc_loss(uniform(2, 2), Labels{1}).loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(ctc::ctc_loss(uniform(3, 2), Labels{1, 1}).loss == doctest::Approx(-std::log(0.125)).epsilon(1e-12));
}

TEST_CASE("infeasible and invalid targets") {
  try {
    ctc::ctc_loss(uniform(2, 2), Labels{1, 1});
    FAIL("expected InfeasibleTarget");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kInfeasibleTarget);
  }
  CHECK_THROWS_AS(ctc::ctc_loss(uniform(4, 3), Labels{3}), Error);
  CHECK_THROWS_AS(ctc::ctc_loss(uniform(4, 3), Labels{0}), Error);
  CHECK(ctc::min_frames(Labels{}) == 0);
  CHECK(ctc::min_frames(Labels{1, 1, 2, 2, 2}) == 8);
  CHECK(ctc::min_frames(Labels{1, 2, 1}) == 3);
}

TEST_CASE("empty target costs the all-blank path") {
  Rng rng(3);
  const Eigen::MatrixXd y = oracle::random_stochastic(rng, 5, 4);
  double expected = 0.0;
  for (int t = 0; t < 5; ++t) expected -= std::log(y(t, 0));
  const auto r = ctc::ctc_loss(y, Labels{});
  CHECK(r.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("loss matches brute-force enumeration") {
  Rng rng(42);
  for (int k = 1; k <= 3; ++k) {
    for (int frames = 1; frames <= 5; ++frames) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto y = oracle::random_stochastic(rng, frames, k + 1);
        const auto all = oracle::enumerate_paths(y);
        for (const auto& [target, p] : all) {
          const double loss = ctc::ctc_negative_log_likelihood(y, target);
          CHECK(std::abs(loss + std::log(p)) / std::max(-std::log(p), 1e-300) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("gradient rows match the softmax-input derivative by differences") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int frames = rng.between(3, 8), classes = rng.between(2, 4);
    Eigen::MatrixXd logits(frames, classes);
    for (int i = 0; i < logits.size(); ++i) logits.data()[i] = rng.uniform(-2, 2);
    Labels target;
    for (int i = 0, n = rng.between(0, 2); i < n; ++i) target.push_back(rng.between(1, classes - 1));
    if (ctc::min_frames(target) > frames) continue;
    auto softmax = [](Eigen::MatrixXd z) {
      for (int r = 0; r < z.rows(); ++r) {
        z.row(r) = (z.row(r).array() - z.row(r).maxCoeff()).exp();
        z.row(r) /= z.row(r).sum();
      }
      return z;
    };
    const auto r = ctc::ctc_loss(softmax(logits), target);
    for (int i = 0; i < logits.size(); ++i) {
      Eigen::MatrixXd up = logits, down = logits;
      up.data()[i] += 1e-5;
      down.data()[i] -= 1e-5;
      const double numeric = (ctc::ctc_negative_log_likelihood(softmax(up), target) -
                              ctc::ctc_negative_log_likelihood(softmax(down), target)) / 2e-5;
      CHECK(r.grad.data()[i] == doctest::Approx(numeric).epsilon(1e-6).scale(1.0));
    }
    for (int t = 0; t < frames; ++t) CHECK(std::abs(r.grad.row(t).sum()) < 1e-12);
  }
}

TEST_CASE("concentrating mass on a valid path lowers the loss") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int frames = 6;
    auto y = oracle::random_stochastic(rng, frames, 4);
    const Labels target{1, 2};
    const std::vector<int> path{0, 1, 1, 0, 2, 0};
    const double before = ctc::ctc_negative_log_likelihood(y, target);
    for (int t = 0; t < frames; ++t) {
      y.row(t) *= 0.1;
      y(t, path[t]) += 0.9;
    }
    CHECK(ctc::ctc_negative_log_likelihood(y, target) < before);
  }
}

TEST_CASE("log_sum_exp handles infinities") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(ctc::log_sum_exp(-inf, -inf) == -inf);
  CHECK(ctc::log_sum_exp(-inf, 1.5) == 1.5);
  CHECK(ctc::log_sum_exp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)));
}
