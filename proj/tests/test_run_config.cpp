// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>

#include "rtlocr/dataset.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/parallel.hpp"
#include "rtlocr/run_config.hpp"
#include "test_support.hpp"

using namespace rtlocr;

namespace {

RunConfig make() { return RunConfig({"seed", "hidden", "learning-rate", "output"}); }

}  // namespace

TEST_CASE("parsing keys, comments and blank lines") {
  auto cfg = make();
  cfg.parse("# run\n\nseed = 7\n  hidden=200   # wider\nlearning-rate = 1e-3\r\noutput = run dir/x\n");
  CHECK(cfg.get_uint("seed", 0) == 7);
  CHECK(cfg.get_int("hidden", 0) == 200);
  CHECK(cfg.get_double("learning-rate", 0) == 1e-3);
  CHECK(cfg.get_or("output", "") == "run dir/x");
  CHECK(cfg.get_or("missing", "fallback") == "fallback");
  CHECK_FALSE(make().get("seed").has_value());
}

TEST_CASE("unknown keys and malformed lines name their origin") {
  auto cfg = make();
  try {
    cfg.parse("seed = 1\ncolour = red\n", "run.cfg");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kInvalidConfig);
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(make().parse("seed 1"), Error);
  CHECK_THROWS_AS(make().parse(" = 1"), Error);
  CHECK_THROWS_AS(make().set("colour", "red"), Error);
  auto bad = make();
  bad.parse("seed = 12x\nhidden = -1\nlearning-rate = fast");
  CHECK_THROWS_AS(bad.get_uint("seed", 0), Error);
  CHECK(bad.get_int("hidden", 0) == -1);
  CHECK_THROWS_AS(bad.get_double("learning-rate", 0), Error);
}

TEST_CASE("to_string is sorted and parses back") {
  auto cfg = make();
  cfg.set("seed", "3");
  cfg.set("hidden", "100");
  CHECK(cfg.to_string() == "hidden = 100\nseed = 3\n");
  auto again = make();
  again.parse(cfg.to_string());
  CHECK(again.values() == cfg.values());
}

TEST_CASE("loading from a file") {
  test::TempDir dir;
  test::spit(dir.path / "c.cfg", "seed = 5\n");
  auto cfg = make();
  cfg.load(dir.path / "c.cfg");
  CHECK(cfg.get_uint("seed", 0) == 5);
  CHECK_THROWS_AS(make().load(dir.path / "missing.cfg"), Error);
}

TEST_CASE("sample status names") {
  CHECK(status_name(SampleStatus::kChecked) == "checked");
  CHECK(parse_status("draft") == SampleStatus::kDraft);
  CHECK_THROWS_AS(parse_status("final"), Error);
}

TEST_CASE("merging datasets keeps order and sources") {
  Dataset a(2), b(3);
  a[0].source_id = a[1].source_id = "a";
  for (auto& s : b) s.source_id = "b";
  const auto m = merge_datasets({a, b});
  CHECK(m.size() == 5);
  CHECK(m[1].source_id == "a");
  CHECK(m[2].source_id == "b");
  CHECK(merge_datasets({a, {}}).size() == a.size());
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(Errc::kInvalidArgument, "seven");
                  }),
                  Error);
}
