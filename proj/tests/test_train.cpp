// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "rtlocr/error.hpp"
#include "rtlocr/store.hpp"
#include "rtlocr/synth.hpp"
#include "rtlocr/train.hpp"
#include "test_support.hpp"

using namespace rtlocr;

namespace {

Dataset numbered(size_t n) {
  Dataset d(n);
  for (size_t i = 0; i < n; ++i) d[i].id = std::to_string(i);
  return d;
}

Dataset tiny_corpus(size_t lines, std::uint64_t seed = 1) {
  synth::CorpusConfig cfg;
  cfg.lines = lines;
  cfg.seed = seed;
  cfg.text_length = {4, 8};
  return synth::generate_corpus(synth::Typeface::base(), {}, cfg);
}

train::TrainConfig quick_config() {
  train::TrainConfig cfg;
  cfg.hidden = 8;
  cfg.max_updates = 30;
  cfg.validation_interval = 10;
  cfg.learning_rate = 1e-3;
  return cfg;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::kInvalidArgument;
}

}  // namespace

TEST_CASE("split sizes") {
  auto [a, b] = train::split(numbered(100), 0.1, 1);
  CHECK(a.size() == 90);
  CHECK(b.size() == 10);
  auto [c, d] = train::split(numbered(10), 0.1, 1);
  CHECK(c.size() == 9);
  CHECK(d.size() == 1);
  CHECK(code_of([] { train::split(numbered(5), 0.1, 1); }) == Errc::kTooFewSamples);
}

TEST_CASE("split is a seeded partition") {
  const auto data = numbered(57);
  const auto [a, b] = train::split(data, 0.25, 9);
  const auto [a2, b2] = train::split(data, 0.25, 9);
  CHECK(b.size() == 14);
  std::set<std::string> ids;
  for (const auto& s : a) ids.insert(s.id);
  for (const auto& s : b) ids.insert(s.id);
  CHECK(ids.size() == 57);
  std::vector<std::string> x, y;
  for (const auto& s : b) x.push_back(s.id);
  for (const auto& s : b2) y.push_back(s.id);
  CHECK(x == y);
  const auto [a3, b3] = train::split(data, 0.25, 10);
  std::vector<std::string> z;
  for (const auto& s : b3) z.push_back(s.id);
  CHECK(z != x);
}

TEST_CASE("config validation") {
  auto cfg = quick_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.validation_fraction = 1.0;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::kInvalidConfig);
  cfg = quick_config();
  cfg.hidden = 0;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::kInvalidConfig);
  cfg = quick_config();
  cfg.momentum = 1.0;
  CHECK(code_of([&] { cfg.validate(); }) == Errc::kInvalidConfig);
}

TEST_CASE("zero updates returns the untrained model") {
  auto cfg = quick_config();
  cfg.max_updates = 0;
  const auto r = train::train(tiny_corpus(12), cfg);
  CHECK(r.report.history.empty());
  CHECK(r.report.updates == 0);
  CHECK(r.model.hidden_size() == 8);
}

TEST_CASE("a short run validates on schedule, checkpoints and is reproducible") {
  const auto data = tiny_corpus(20);
  test::TempDir dir;
  auto cfg = quick_config();
  cfg.run_dir = dir.path / "run";
  std::vector<std::uint64_t> seen;
  const auto r = train::train(data, cfg, [&](const train::ValidationPoint& p) { seen.push_back(p.updates); });
  CHECK(r.report.updates == 30);
  CHECK(seen == std::vector<std::uint64_t>{10, 20, 30});
  REQUIRE(r.report.history.size() == 3);
  for (size_t i = 1; i < r.report.history.size(); ++i) {
    CHECK(r.report.history[i - 1].updates < r.report.history[i].updates);
  }
  for (const auto& p : r.report.history) {
    CHECK(p.mean_loss > 0.0);
    CHECK((p.script_accuracy >= 0.0 && p.script_accuracy <= 100.0));
  }
  REQUIRE(r.report.best_updates.has_value());
  CHECK(r.model.metadata.updates == *r.report.best_updates);
  CHECK(r.report.stop_reason == "max_updates");
  CHECK(r.report.seconds_per_update > 0.0);
  for (const char* f : {"best.korm", "checkpoint-10.korm", "checkpoint-20.korm", "checkpoint-30.korm", "report.jsonl"}) {
    CHECK(std::filesystem::exists(*cfg.run_dir / f));
  }
  CHECK(same_model(store::load_model(*cfg.run_dir / "best.korm"), r.model));
  const auto report = test::slurp(*cfg.run_dir / "report.jsonl");
  CHECK(std::count(report.begin(), report.end(), '\n') == 3);

  cfg.run_dir.reset();
  const auto again = train::train(data, cfg);
  CHECK(same_model(again.model, r.model));
  CHECK(again.report.history == r.report.history);
}

TEST_CASE("patience stops a run that stops improving") {
  auto cfg = quick_config();
  cfg.learning_rate = 1e-9;
  cfg.max_updates = 1000;
  cfg.validation_interval = 5;
  cfg.patience = 2;
  const auto r = train::train(tiny_corpus(12), cfg);
  CHECK(r.report.stop_reason == "patience");
  CHECK(r.report.updates < 1000);
}

TEST_CASE("training input errors") {
  auto data = tiny_corpus(12);
  auto cfg = quick_config();
  cfg.line_height = 32;
  CHECK(code_of([&] { train::train(data, cfg); }) == Errc::kShapeMismatch);

  cfg = quick_config();
  CHECK(code_of([&] { train::train(data, {}, cfg); }) == Errc::kEmptyDataset);
  CHECK(code_of([&] { train::train(Dataset{}, data, cfg); }) == Errc::kEmptyDataset);

  // Every target is longer than its line can emit.
  Dataset impossible(data.begin(), data.begin() + 3);
  for (auto& s : impossible) s.text = std::u32string(s.image.width() + 5, U'ب');
  cfg.max_updates = 5;
  CHECK(code_of([&] { train::train(impossible, impossible, cfg); }) == Errc::kInfeasibleTarget);
}

TEST_CASE("timing helper reports a positive mean") {
  CHECK(train::time_updates(tiny_corpus(3), 8, 5) > 0.0);
  CHECK_THROWS_AS(train::time_updates({}, 8, 5), Error);
}

TEST_CASE("report json") {
  train::TrainReport r;
  r.history.push_back({10, 50.0, 60.0, 3.5});
  r.best_updates = 10;
  r.updates = 10;
  r.stop_reason = "max_updates";
  const auto j = r.to_json();
  CHECK(j["history"][0]["script_accuracy"] == 60.0);
  CHECK(j["best_updates"] == 10);
}
