// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/model.hpp"

#include <algorithm>
#include <bit>

#include "rtlocr/dataset.hpp"
#include "rtlocr/error.hpp"

namespace rtlocr {

OcrModel OcrModel::create(const script::Codec& codec, int line_height, int hidden, std::uint64_t seed) {
  if (codec.size() == 0) throw Error(Errc::kEmptyCorpus, "cannot create a model with an empty codec");
  OcrModel model;
  model.line_height = line_height;
  model.codec = codec;
  model.network = net::Network<float>(line_height, hidden, codec.num_classes());
  model.network.initialize(seed);
  model.metadata.seed = seed;
  return model;
}

net::Posteriors OcrModel::posteriors(const imaging::LineImage& line) const {
  return network.forward(line.pixels).posteriors;
}

decode::Recognition OcrModel::recognize(const imaging::LineImage& line) const {
  return decode::best_path_decode(posteriors(line), codec);
}

bool same_model(const OcrModel& a, const OcrModel& b) {
  if (a.line_height != b.line_height || !(a.codec == b.codec) || !(a.metadata == b.metadata) ||
      a.network.input_height() != b.network.input_height() || a.network.hidden() != b.network.hidden() ||
      a.network.classes() != b.network.classes()) {
    return false;
  }
  std::vector<const net::Mat<float>*> lhs;
  a.network.params().for_each([&](const char*, const net::Mat<float>& m) { lhs.push_back(&m); });
  size_t i = 0;
  bool equal = true;
  b.network.params().for_each([&](const char*, const net::Mat<float>& m) {
    const auto& l = *lhs[i++];
    equal = equal && l.rows() == m.rows() && l.cols() == m.cols() &&
            std::equal(l.data(), l.data() + l.size(), m.data(),
                       [](float x, float y) { return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y); });
  });
  return equal;
}

// ---- dataset helpers --------------------------------------------------------

std::string_view status_name(SampleStatus s) { return s == SampleStatus::kChecked ? "checked" : "draft"; }

SampleStatus parse_status(std::string_view name) {
  if (name == "checked") return SampleStatus::kChecked;
  if (name == "draft") return SampleStatus::kDraft;
  throw Error(Errc::kInvalidArgument, "status must be 'draft' or 'checked', got '" + std::string(name) + "'");
}

Dataset merge_datasets(const std::vector<Dataset>& parts) {
  Dataset out;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<std::u32string> texts_of(const Dataset& data) {
  std::vector<std::u32string> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.text);
  return out;
}

}  // namespace rtlocr
