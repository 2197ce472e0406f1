// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtlocr/decode.hpp"
#include "rtlocr/imaging.hpp"
#include "rtlocr/net.hpp"
#include "rtlocr/script.hpp"

namespace rtlocr {

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::uint64_t updates = 0;
  std::vector<std::string> source_ids;

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

/// A trained (or freshly initialized) line recognizer with everything needed
/// to run it: codec, input height and weights.
struct OcrModel {
  int line_height = imaging::kDefaultLineHeight;
  script::Codec codec;
  net::Network<float> network;
  ModelMetadata metadata;

  int hidden_size() const { return network.hidden(); }

  /// Fresh model with uniform(-0.1, 0.1) weights.
  static OcrModel create(const script::Codec& codec, int line_height, int hidden, std::uint64_t seed);

  net::Posteriors posteriors(const imaging::LineImage& line) const;
  decode::Recognition recognize(const imaging::LineImage& line) const;
};

/// Field-by-field equality, tensors compared bit-exactly.
bool same_model(const OcrModel& a, const OcrModel& b);

}  // namespace rtlocr
