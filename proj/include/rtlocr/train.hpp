// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlocr/dataset.hpp"
#include "rtlocr/model.hpp"
#include "rtlocr/script.hpp"

namespace rtlocr::train {

struct TrainConfig {
  int hidden = 100;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  std::uint64_t max_updates = 30000;
  double validation_fraction = 0.1;
  std::uint64_t validation_interval = 1000;
  int patience = 5;
  std::uint64_t seed = 1;
  int line_height = imaging::kDefaultLineHeight;
  int jobs = 1;                           // validation fan-out
  std::optional<std::filesystem::path> run_dir;  // checkpoints + report when set
  script::ScriptFilter filter = script::ScriptFilter::arabic();

  void validate() const;  // throws InvalidConfig
};

struct ValidationPoint {
  std::uint64_t updates = 0;
  double full_accuracy = 0.0;
  double script_accuracy = 0.0;
  double mean_loss = 0.0;  // over updates since the previous point

  friend bool operator==(const ValidationPoint&, const ValidationPoint&) = default;
};

struct TrainReport {
  std::vector<ValidationPoint> history;
  std::optional<std::uint64_t> best_updates;
  std::uint64_t updates = 0;
  std::uint64_t skipped_infeasible = 0;
  double seconds_per_update = 0.0;  // mean over updates, validation excluded
  double seconds_total = 0.0;
  std::string stop_reason;

  nlohmann::json to_json() const;
};

struct TrainResult {
  OcrModel model;
  TrainReport report;
};

using Progress = std::function<void(const ValidationPoint&)>;

/// Seeded split: the validation part has round(n * fraction) samples, at
/// least one.
std::pair<Dataset, Dataset> split(const Dataset& data, double validation_fraction, std::uint64_t seed);

/// Splits `data` per the config and trains on the larger part.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const Progress& progress = {});

/// Trains with an explicit validation set. The codec covers both sets.
TrainResult train(const Dataset& train_set, const Dataset& validation_set, const TrainConfig& cfg,
                  const Progress& progress = {});

/// Mean wall time of `updates` CTC updates cycling over `data` (no
/// validation), for a fresh model of the given size.
double time_updates(const Dataset& data, int hidden, std::uint64_t updates, std::uint64_t seed = 1);

}  // namespace rtlocr::train
