// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/decode.hpp"

#include <numeric>

namespace rtlocr::decode {

double Recognition::mean_confidence() const {
  if (confidence.empty()) return 1.0;
  return std::accumulate(confidence.begin(), confidence.end(), 0.0) / static_cast<double>(confidence.size());
}

std::vector<LabelRun> argmax_runs(const net::Posteriors& post) {
  std::vector<LabelRun> runs;
  double prob_sum = 0.0;
  for (Eigen::Index t = 0; t < post.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < post.cols(); ++k) {
      if (post(t, k) > post(t, best)) best = k;
    }
    const auto label = static_cast<script::Label>(best);
    const int frame = static_cast<int>(t);
    if (!runs.empty() && runs.back().label == label) {
      runs.back().end = frame + 1;
    } else {
      if (!runs.empty()) runs.back().mean_probability = prob_sum / (runs.back().end - runs.back().begin);
      runs.push_back({label, frame, frame + 1, 0.0});
      prob_sum = 0.0;
    }
    prob_sum += post(t, best);
  }
  if (!runs.empty()) runs.back().mean_probability = prob_sum / (runs.back().end - runs.back().begin);
  return runs;
}

Recognition best_path_decode(const net::Posteriors& post, const script::Codec& codec) {
  std::u32string display;
  std::vector<double> conf;
  std::vector<std::pair<int, int>> frames;
  for (const LabelRun& run : argmax_runs(post)) {
    if (run.label == script::kBlank) continue;
    display.push_back(codec.character(run.label));
    conf.push_back(run.mean_probability);
    frames.emplace_back(run.begin, run.end);
  }
  Recognition rec;
  const auto perm = script::reorder_permutation(display);
  rec.text.resize(display.size());
  rec.confidence.resize(display.size());
  rec.frames.resize(display.size());
  for (size_t i = 0; i < perm.size(); ++i) {
    rec.text[i] = display[perm[i]];
    rec.confidence[i] = conf[perm[i]];
    rec.frames[i] = frames[perm[i]];
  }
  return rec;
}

}  // namespace rtlocr::decode
