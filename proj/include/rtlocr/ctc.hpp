// SPDX-License-Identifier: Apache-2.0
//
// Connectionist temporal classification loss with exact gradients.
//
// The target l of length L is augmented with blanks to l' (length 2L+1).
// alpha_t(s) is the log probability of all prefixes of paths ending in l'_s
// at frame t (including frame t); beta_t(s) that of all suffixes from frame
// t+1 given l'_s at t. Everything is computed in log space.
#pragma once

#include <span>

#include <Eigen/Core>

#include "rtlocr/script.hpp"

namespace rtlocr::ctc {

/// Minimum number of frames needed to emit `target`: one per label plus one
/// blank between each pair of equal neighbours.
int min_frames(std::span<const script::Label> target);

struct CtcResult {
  double loss = 0.0;      // -log p(target | posteriors)
  Eigen::MatrixXd grad;   // d loss / d logits, T x (K+1)
};

/// `posteriors` is T x (K+1), rows summing to one. Throws InfeasibleTarget when
/// T < min_frames(target), InvalidArgument for labels outside [1, K].
CtcResult ctc_loss(const Eigen::MatrixXd& posteriors, std::span<const script::Label> target);

/// Loss only; cheaper when no gradient is needed.
double ctc_negative_log_likelihood(const Eigen::MatrixXd& posteriors, std::span<const script::Label> target);

double log_sum_exp(double a, double b);

}  // namespace rtlocr::ctc
