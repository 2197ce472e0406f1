// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "rtlocr/ctc.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/evaluate.hpp"
#include "rtlocr/random.hpp"
#include "rtlocr/store.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::train {

namespace {

using Clock = std::chrono::steady_clock;

script::Codec codec_for(const Dataset& a, const Dataset& b) {
  auto texts = texts_of(a);
  for (const auto& s : b) texts.push_back(s.text);
  return script::build_codec(texts);
}

std::vector<std::string> source_ids(const Dataset& data) {
  std::vector<std::string> ids;
  for (const auto& s : data) {
    if (std::find(ids.begin(), ids.end(), s.source_id) == ids.end()) ids.push_back(s.source_id);
  }
  return ids;
}

void check_coverage(const Dataset& data, const script::Codec& codec) {
  for (const auto& s : data) {
    for (char32_t c : text::nfc(s.text)) {
      if (!codec.label(c) && !text::is_separator(c)) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
        throw Error(Errc::kCodecCoverage, "sample " + s.id + " uses " + buf + " which the codec lacks");
      }
    }
  }
}

// Ordered so that the later element wins: script accuracy, then full.
bool better(const ValidationPoint& a, const ValidationPoint& b) {
  if (a.script_accuracy != b.script_accuracy) return a.script_accuracy > b.script_accuracy;
  return a.full_accuracy > b.full_accuracy;
}

}  // namespace

void TrainConfig::validate() const {
  if (hidden <= 0) throw Error(Errc::kInvalidConfig, "hidden size must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::kInvalidConfig, "validation fraction must lie in (0, 1)");
  }
  if (!(learning_rate > 0.0)) throw Error(Errc::kInvalidConfig, "learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error(Errc::kInvalidConfig, "momentum must lie in [0, 1)");
  if (validation_interval == 0) throw Error(Errc::kInvalidConfig, "validation interval must be positive");
  if (patience <= 0) throw Error(Errc::kInvalidConfig, "patience must be positive");
  if (line_height <= 0) throw Error(Errc::kInvalidConfig, "line height must be positive");
}

std::pair<Dataset, Dataset> split(const Dataset& data, double validation_fraction, std::uint64_t seed) {
  if (data.size() < 10) {
    throw Error(Errc::kTooFewSamples, "need at least 10 samples to split, got " + std::to_string(data.size()));
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::kInvalidConfig, "validation fraction must lie in (0, 1)");
  }
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5B117));
  rng.shuffle(std::span(order));
  const size_t n_val = std::clamp<size_t>(static_cast<size_t>(std::lround(data.size() * validation_fraction)), 1,
                                          data.size() - 1);
  std::vector<bool> in_val(data.size(), false);
  for (size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;
  Dataset train_set, val_set;
  for (size_t i = 0; i < data.size(); ++i) (in_val[i] ? val_set : train_set).push_back(data[i]);
  return {std::move(train_set), std::move(val_set)};
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const Progress& progress) {
  cfg.validate();
  auto [train_set, val_set] = split(data, cfg.validation_fraction, cfg.seed);
  return train(train_set, val_set, cfg, progress);
}

TrainResult train(const Dataset& train_set, const Dataset& validation_set, const TrainConfig& cfg,
                  const Progress& progress) {
  cfg.validate();
  if (train_set.empty()) throw Error(Errc::kEmptyDataset, "training set is empty");
  if (validation_set.empty()) throw Error(Errc::kEmptyDataset, "validation set is empty");
  for (const auto& s : train_set) {
    if (s.image.height() != cfg.line_height) {
      throw Error(Errc::kShapeMismatch, "sample " + s.id + " is " + std::to_string(s.image.height()) +
                                            " px tall, expected " + std::to_string(cfg.line_height));
    }
  }
  const script::Codec codec = codec_for(train_set, validation_set);
  check_coverage(train_set, codec);
  check_coverage(validation_set, codec);

  OcrModel model = OcrModel::create(codec, cfg.line_height, cfg.hidden, cfg.seed);
  model.metadata.source_ids = source_ids(train_set);
  TrainResult result{model, {}};
  TrainReport& report = result.report;
  if (cfg.max_updates == 0) {
    report.stop_reason = "max_updates";
    return result;
  }

  if (cfg.run_dir) std::filesystem::create_directories(*cfg.run_dir);
  std::string report_lines;

  // Targets are fixed per sample; encode once.
  std::vector<std::vector<script::Label>> targets(train_set.size());
  for (size_t i = 0; i < train_set.size(); ++i) targets[i] = script::encode(train_set[i].text, codec);

  const net::Hyper hyper{cfg.learning_rate, cfg.momentum};
  Rng rng(derive_seed(cfg.seed, 0x7A41));
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();

  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  double update_seconds = 0.0;
  int stale = 0;
  std::optional<ValidationPoint> best;
  const auto started = Clock::now();

  auto validate_now = [&] {
    model.metadata.updates = report.updates;
    const auto eval = evaluate::evaluate(model, validation_set, cfg.filter, cfg.jobs, 0);
    ValidationPoint p;
    p.updates = report.updates;
    p.full_accuracy = eval.full_accuracy.value_or(0.0);
    p.script_accuracy = eval.script_accuracy.value_or(0.0);
    p.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    loss_sum = 0.0;
    loss_count = 0;
    report.history.push_back(p);
    if (progress) progress(p);
    if (!best || better(p, *best)) {
      best = p;
      report.best_updates = p.updates;
      result.model = model;
      stale = 0;
      if (cfg.run_dir) store::save_model(model, *cfg.run_dir / "best.korm");
    } else {
      ++stale;
    }
    if (cfg.run_dir) {
      store::save_model(model, *cfg.run_dir / ("checkpoint-" + std::to_string(p.updates) + ".korm"));
      nlohmann::json line = {{"updates", p.updates},
                             {"full_accuracy", p.full_accuracy},
                             {"script_accuracy", p.script_accuracy},
                             {"mean_loss", p.mean_loss}};
      report_lines += line.dump() + "\n";
      store::write_atomic(*cfg.run_dir / "report.jsonl", report_lines);
    }
  };

  std::uint64_t attempts = 0;
  while (report.updates < cfg.max_updates) {
    if (cursor == order.size()) {
      rng.shuffle(std::span(order));
      cursor = 0;
    }
    const size_t idx = order[cursor++];
    ++attempts;
    if (attempts > cfg.max_updates + train_set.size() && report.updates == 0) {
      throw Error(Errc::kInfeasibleTarget, "no sample in the training set has a feasible target");
    }
    const auto t0 = Clock::now();
    auto pass = model.network.forward(train_set[idx].image.pixels);
    ctc::CtcResult loss;
    try {
      loss = ctc::ctc_loss(pass.posteriors, targets[idx]);
    } catch (const Error& e) {
      if (e.code() != Errc::kInfeasibleTarget) throw;
      ++report.skipped_infeasible;
      continue;
    }
    model.network.backward_update(pass, loss.grad, hyper);
    update_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    ++report.updates;
    loss_sum += loss.loss;
    ++loss_count;

    if (report.updates % cfg.validation_interval == 0) {
      validate_now();
      if (stale >= cfg.patience) {
        report.stop_reason = "patience";
        break;
      }
    }
  }
  if (report.stop_reason.empty()) {
    report.stop_reason = "max_updates";
    if (report.history.empty() || report.history.back().updates != report.updates) validate_now();
  }
  report.seconds_per_update = report.updates ? update_seconds / static_cast<double>(report.updates) : 0.0;
  report.seconds_total = std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

double time_updates(const Dataset& data, int hidden, std::uint64_t updates, std::uint64_t seed) {
  if (data.empty() || updates == 0) throw Error(Errc::kInvalidArgument, "timing needs data and updates");
  const script::Codec codec = script::build_codec(texts_of(data));
  OcrModel model = OcrModel::create(codec, data.front().image.height(), hidden, seed);
  const net::Hyper hyper;
  double seconds = 0.0;
  std::uint64_t done = 0;
  for (size_t i = 0; done < updates; i = (i + 1) % data.size()) {
    const auto labels = script::encode(data[i].text, codec);
    const auto t0 = Clock::now();
    auto pass = model.network.forward(data[i].image.pixels);
    const auto loss = ctc::ctc_loss(pass.posteriors, labels);
    model.network.backward_update(pass, loss.grad, hyper);
    seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    ++done;
  }
  return seconds / static_cast<double>(updates);
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json j;
  j["history"] = nlohmann::json::array();
  for (const auto& p : history) {
    j["history"].push_back({{"updates", p.updates},
                            {"full_accuracy", p.full_accuracy},
                            {"script_accuracy", p.script_accuracy},
                            {"mean_loss", p.mean_loss}});
  }
  j["best_updates"] = best_updates ? nlohmann::json(*best_updates) : nlohmann::json(nullptr);
  j["updates"] = updates;
  j["skipped_infeasible"] = skipped_infeasible;
  j["seconds_per_update"] = seconds_per_update;
  j["seconds_total"] = seconds_total;
  j["stop_reason"] = stop_reason;
  return j;
}

}  // namespace rtlocr::train
