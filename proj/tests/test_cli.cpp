// SPDX-License-Identifier: Apache-2.0
//
// Drives the rtlocr executable end to end on a tiny corpus.
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

#ifndef RTLOCR_CLI_PATH
#error "RTLOCR_CLI_PATH must point at the rtlocr executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run rtlocr(const std::string& args) {
  const std::string cmd = std::string(RTLOCR_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(rtlocr("").code == 1);
  CHECK(rtlocr("frobnicate").code == 1);
  CHECK(rtlocr("synth").code == 1);
  CHECK(rtlocr("synth --quality medium -o /tmp/x").code == 1);
  CHECK(rtlocr("--version").code == 0);

  test::TempDir dir;
  test::spit(dir.path / "bad.cfg", "lines = 3\ncolour = red\n");
  CHECK(rtlocr("synth --config " + q(dir.path / "bad.cfg") + " -o " + q(dir.path / "ds")).code == 1);
  CHECK(rtlocr("synth --typeface derived:x -o " + q(dir.path / "ds")).code == 1);
}

TEST_CASE("data errors exit 2") {
  test::TempDir dir;
  fs::create_directories(dir.path / "empty");
  CHECK(rtlocr("inspect-model " + q(dir.path / "missing.korm")).code == 2);
  test::spit(dir.path / "junk.korm", "not a model");
  CHECK(rtlocr("inspect-model " + q(dir.path / "junk.korm")).code == 2);
  CHECK(rtlocr("binarize " + q(dir.path / "missing.png") + " -o " + q(dir.path / "o.png")).code == 2);
}

TEST_CASE("synth, config precedence and echo") {
  test::TempDir dir;
  test::spit(dir.path / "run.cfg", "# small corpus\nlines = 4\nquality = low\nseed = 3\n");
  const auto r = rtlocr("synth --config " + q(dir.path / "run.cfg") + " --lines 6 --pages 2 -o " + q(dir.path / "ds"));
  REQUIRE(r.code == 0);
  const auto manifest = nlohmann::json::parse(test::slurp(dir.path / "ds" / "corpus.json"));
  CHECK(manifest["lines"] == 6);
  CHECK(manifest["quality"] == "low");
  CHECK(manifest["seed"] == 3);
  CHECK(fs::exists(dir.path / "ds" / "pages" / "page-001.png"));
  CHECK(fs::exists(dir.path / "ds" / "pages" / "page-002.png"));
  const auto echoed = test::slurp(dir.path / "ds" / "config.txt");
  CHECK(echoed.find("lines = 6") != std::string::npos);
  CHECK(echoed.find("quality = low") != std::string::npos);

  // The echoed config reproduces the run.
  REQUIRE(rtlocr("synth --config " + q(dir.path / "ds" / "config.txt") + " -o " + q(dir.path / "again")).code == 0);
  for (const auto& e : fs::directory_iterator(dir.path / "ds")) {
    if (e.path().extension() != ".png") continue;
    CHECK(test::slurp(e.path()) == test::slurp(dir.path / "again" / e.path().filename()));
  }

  const auto seg = rtlocr("segment " + q(dir.path / "ds" / "pages" / "page-001.png"));
  CHECK(seg.code == 0);
  CHECK(std::count(seg.out.begin(), seg.out.end(), '\n') == 3);
}

TEST_CASE("train, eval, ocr and inspect on a tiny corpus") {
  test::TempDir dir;
  REQUIRE(rtlocr("synth --lines 12 --min-length 4 --max-length 8 --pages 1 -o " + q(dir.path / "ds")).code == 0);
  const auto t = rtlocr("train -d " + q(dir.path / "ds") + " -o " + q(dir.path / "run") +
                        " --hidden 4 --max-updates 20 --validation-interval 10 --learning-rate 1e-3");
  REQUIRE(t.code == 0);
  CHECK(fs::exists(dir.path / "run" / "best.korm"));
  CHECK(fs::exists(dir.path / "run" / "checkpoint-20.korm"));
  CHECK(fs::exists(dir.path / "run" / "report.json"));
  CHECK(test::slurp(dir.path / "run" / "config.txt").find("hidden = 4") != std::string::npos);

  const auto info = nlohmann::json::parse(rtlocr("inspect-model " + q(dir.path / "run" / "best.korm")).out);
  CHECK(info["hidden"] == 4);
  CHECK(info["line_height"] == 48);

  const auto e = rtlocr("eval --csv -m " + q(dir.path / "run" / "best.korm") + " -d " + q(dir.path / "ds") +
                        " --json " + q(dir.path / "eval.json"));
  CHECK(e.code == 0);
  CHECK(e.out.rfind("model,work,quality,type,full,ar\n", 0) == 0);
  const auto details = nlohmann::json::parse(test::slurp(dir.path / "eval.json"));
  CHECK(details[0]["lines"].size() == 12);

  const auto o = rtlocr("ocr -m " + q(dir.path / "run" / "best.korm") + " " + q(dir.path / "ds" / "pages" / "page-001.png"));
  CHECK(o.code == 0);
  CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 12);

  fs::create_directories(dir.path / "empty");
  CHECK(rtlocr("eval -m " + q(dir.path / "run" / "best.korm") + " -d " + q(dir.path / "empty")).code == 2);
}

TEST_CASE("make-form and import-transcription") {
  test::TempDir dir;
  REQUIRE(rtlocr("synth --lines 5 --min-length 6 --max-length 12 --pages 1 -o " + q(dir.path / "ds")).code == 0);
  std::string prefill;
  for (int i = 0; i < 5; ++i) prefill += test::slurp(dir.path / "ds" / ("base-high-1-0000" + std::to_string(i) + ".gt.txt"));
  test::spit(dir.path / "prefill.txt", prefill);
  const auto f = rtlocr("make-form " + q(dir.path / "ds" / "pages" / "page-001.png") + " --prefill " +
                        q(dir.path / "prefill.txt") + " -o " + q(dir.path / "f.html"));
  REQUIRE(f.code == 0);
  auto manifest = nlohmann::json::parse(test::slurp(dir.path / "f.manifest.json"));
  REQUIRE(manifest["lines"].size() == 5);
  for (auto& l : manifest["lines"]) l["status"] = "checked";
  test::spit(dir.path / "m.json", manifest.dump());

  const auto ok = rtlocr("import-transcription --manifest " + q(dir.path / "m.json") + " --lines " +
                         q(dir.path / "f_lines") + " -o " + q(dir.path / "gold"));
  CHECK(ok.code == 0);
  CHECK(nlohmann::json::parse(ok.out)["imported"].size() == 5);
  CHECK(test::slurp(dir.path / "gold" / "p001-l001.gt.txt") ==
        test::slurp(dir.path / "ds" / "base-high-1-00000.gt.txt"));

  test::spit(dir.path / "f_lines" / "p001-l003.png", "tampered");
  const auto bad = rtlocr("import-transcription --manifest " + q(dir.path / "m.json") + " --lines " +
                          q(dir.path / "f_lines") + " -o " + q(dir.path / "gold2"));
  CHECK(bad.code == 2);
  CHECK(nlohmann::json::parse(bad.out)["digest_mismatch"].size() == 1);
}
