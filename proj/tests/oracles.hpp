// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations the library is checked against.
// They share no code with src/ and favour obviousness over speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rtlocr/random.hpp"

namespace oracle {

/// Collapses a frame-level path: merge repeats, then drop blanks (label 0).
inline std::vector<int> collapse(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int p : path) {
    if (p != prev && p != 0) out.push_back(p);
    prev = p;
  }
  return out;
}

/// p(target | posteriors) for every reachable target, by enumerating all
/// (K+1)^T frame paths.
inline std::map<std::vector<int>, double> enumerate_paths(const Eigen::MatrixXd& post) {
  const int frames = static_cast<int>(post.rows());
  const int classes = static_cast<int>(post.cols());
  std::map<std::vector<int>, double> total;
  std::vector<int> path(frames, 0);
  for (;;) {
    double p = 1.0;
    for (int t = 0; t < frames; ++t) p *= post(t, path[t]);
    total[collapse(path)] += p;
    int t = frames - 1;
    while (t >= 0 && ++path[t] == classes) path[t--] = 0;
    if (t < 0) break;
  }
  return total;
}

/// Full-table edit distance with unit costs.
template <typename S>
int levenshtein(const S& a, const S& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[n][m];
}

/// T x C matrix with strictly positive rows summing to one.
inline Eigen::MatrixXd random_stochastic(rtlocr::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      m(r, c) = 0.01 + rng.uniform();
      sum += m(r, c);
    }
    m.row(r) /= sum;
  }
  return m;
}

}  // namespace oracle
