// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/ctc.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rtlocr/error.hpp"

namespace rtlocr::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<script::Label> augment(std::span<const script::Label> target) {
  std::vector<script::Label> ext(2 * target.size() + 1, script::kBlank);
  for (size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

void validate(const Eigen::MatrixXd& y, std::span<const script::Label> target) {
  const auto classes = y.cols();
  for (script::Label l : target) {
    if (l <= script::kBlank || l >= classes) {
      throw Error(Errc::kInvalidArgument, "target label " + std::to_string(l) + " outside [1, " +
                                              std::to_string(classes - 1) + "]");
    }
  }
  const int need = min_frames(target);
  if (y.rows() < need) {
    throw Error(Errc::kInfeasibleTarget, std::to_string(y.rows()) + " frames cannot emit a target needing " +
                                             std::to_string(need));
  }
}

// alpha(t, s) over the augmented target; returns log p(target).
double forward_pass(const Eigen::MatrixXd& logy, const std::vector<script::Label>& ext, Eigen::MatrixXd& alpha) {
  const Eigen::Index frames = logy.rows();
  const Eigen::Index states = static_cast<Eigen::Index>(ext.size());
  alpha.setConstant(frames, states, kNegInf);
  alpha(0, 0) = logy(0, ext[0]);
  if (states > 1) alpha(0, 1) = logy(0, ext[1]);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_sum_exp(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != script::kBlank && ext[s] != ext[s - 2]) a = log_sum_exp(a, alpha(t - 1, s - 2));
      alpha(t, s) = a + logy(t, ext[s]);
    }
  }
  double logp = alpha(frames - 1, states - 1);
  if (states > 1) logp = log_sum_exp(logp, alpha(frames - 1, states - 2));
  return logp;
}

}  // namespace

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

int min_frames(std::span<const script::Label> target) {
  int frames = static_cast<int>(target.size());
  for (size_t i = 1; i < target.size(); ++i) frames += target[i] == target[i - 1] ? 1 : 0;
  return frames;
}

double ctc_negative_log_likelihood(const Eigen::MatrixXd& posteriors, std::span<const script::Label> target) {
  validate(posteriors, target);
  const Eigen::MatrixXd logy = posteriors.array().log().matrix();
  Eigen::MatrixXd alpha;
  return -forward_pass(logy, augment(target), alpha);
}

CtcResult ctc_loss(const Eigen::MatrixXd& posteriors, std::span<const script::Label> target) {
  validate(posteriors, target);
  const Eigen::MatrixXd logy = posteriors.array().log().matrix();
  const auto ext = augment(target);
  const Eigen::Index frames = logy.rows();
  const Eigen::Index states = static_cast<Eigen::Index>(ext.size());

  Eigen::MatrixXd alpha;
  const double logp = forward_pass(logy, ext, alpha);

  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = 0.0;
  if (states > 1) beta(frames - 1, states - 2) = 0.0;
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double b = beta(t + 1, s) + logy(t + 1, ext[s]);
      if (s + 1 < states) b = log_sum_exp(b, beta(t + 1, s + 1) + logy(t + 1, ext[s + 1]));
      if (s + 2 < states && ext[s + 2] != script::kBlank && ext[s + 2] != ext[s]) {
        b = log_sum_exp(b, beta(t + 1, s + 2) + logy(t + 1, ext[s + 2]));
      }
      beta(t, s) = b;
    }
  }

  CtcResult result;
  result.loss = -logp;
  result.grad = posteriors;
  Eigen::MatrixXd occupancy = Eigen::MatrixXd::Constant(frames, posteriors.cols(), kNegInf);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      occupancy(t, ext[s]) = log_sum_exp(occupancy(t, ext[s]), alpha(t, s) + beta(t, s));
    }
  }
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < posteriors.cols(); ++k) {
      if (occupancy(t, k) != kNegInf) result.grad(t, k) -= std::exp(occupancy(t, k) - logp);
    }
  }
  return result;
}

}  // namespace rtlocr::ctc
