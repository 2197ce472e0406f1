// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rtlocr/net.hpp"
#include "rtlocr/script.hpp"

namespace rtlocr::decode {

/// Output of best-path decoding, in logical order.
struct Recognition {
  std::u32string text;
  /// Mean argmax probability over the frames of each emitted character.
  std::vector<double> confidence;
  /// Half-open frame (column) range each character was read from.
  std::vector<std::pair<int, int>> frames;

  double mean_confidence() const;
};

/// Collapsed run of identical argmax labels before blank removal.
struct LabelRun {
  script::Label label;
  int begin;
  int end;
  double mean_probability;
};

/// Per-frame argmax (lowest label wins ties) collapsed into runs.
std::vector<LabelRun> argmax_runs(const net::Posteriors& post);

/// Greedy CTC decoding: argmax per frame, collapse repeats, drop blanks,
/// then display -> logical order.
Recognition best_path_decode(const net::Posteriors& post, const script::Codec& codec);

}  // namespace rtlocr::decode
