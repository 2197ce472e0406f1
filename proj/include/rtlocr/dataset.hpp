// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rtlocr/imaging.hpp"

namespace rtlocr {

enum class SampleStatus { kDraft, kChecked };

std::string_view status_name(SampleStatus s);
SampleStatus parse_status(std::string_view name);  // throws InvalidArgument

/// A line image and its ground truth in logical order: the unit of training
/// and evaluation.
struct LineSample {
  std::string id;
  imaging::LineImage image;
  std::u32string text;
  std::string source_id;
  SampleStatus status = SampleStatus::kChecked;
};

using Dataset = std::vector<LineSample>;

/// Concatenates datasets, keeping every sample's source id.
Dataset merge_datasets(const std::vector<Dataset>& parts);

std::vector<std::u32string> texts_of(const Dataset& data);

}  // namespace rtlocr
