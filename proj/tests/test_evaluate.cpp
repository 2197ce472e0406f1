// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rtlocr/evaluate.hpp"
#include "rtlocr/random.hpp"

using namespace rtlocr;
using evaluate::EditKind;
using evaluate::LineRecord;

namespace {

std::u32string random_text(Rng& rng, const std::u32string& pool, int max_len) {
  std::u32string s(rng.between(0, max_len), U' ');
  for (auto& c : s) c = pool[rng.below(pool.size())];
  return s;
}

const auto kArabic = script::ScriptFilter::arabic();

}  // namespace

TEST_CASE("levenshtein small cases") {
  CHECK(evaluate::levenshtein(U"", U"") == 0);
  CHECK(evaluate::levenshtein(U"abc", U"") == 3);
  CHECK(evaluate::levenshtein(U"kitten", U"sitting") == 3);
  CHECK(evaluate::levenshtein(U"كتاب", U"كتب") == 1);
}

TEST_CASE("levenshtein and char_accuracy agree with the table oracle") {
  Rng rng(10);
  const std::u32string pool = U"ابتث .،";
  for (int i = 0; i < 3000; ++i) {
    const auto a = random_text(rng, pool, 25), b = random_text(rng, pool, 25);
    const int d = oracle::levenshtein(a, b);
    CHECK(evaluate::levenshtein(a, b) == d);
    CHECK(evaluate::levenshtein(b, a) == d);
    const auto acc = evaluate::char_accuracy(a, b);
    CHECK(acc.distance == d);
    CHECK(acc.accuracy == doctest::Approx(std::max(0.0, 100.0 * (1.0 - double(d) / std::max<size_t>(a.size(), 1)))));
    CHECK(acc.accuracy >= 0.0);
    CHECK(acc.accuracy <= 100.0);
  }
}

TEST_CASE("alignment reproduces both strings and its cost") {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto gt = random_text(rng, U"abcd", 12), hyp = random_text(rng, U"abcd", 12);
    std::u32string g, h;
    int cost = 0;
    for (const auto& op : evaluate::align(gt, hyp)) {
      if (op.kind != EditKind::kInsert) g += op.gt;
      if (op.kind != EditKind::kDelete) h += op.hyp;
      cost += op.kind == EditKind::kMatch ? 0 : 1;
      if (op.kind == EditKind::kMatch) CHECK(op.gt == op.hyp);
    }
    CHECK(g == gt);
    CHECK(h == hyp);
    CHECK(cost == evaluate::levenshtein(gt, hyp));
  }
}

TEST_CASE("char_accuracy normalizes both sides") {
  CHECK(evaluate::char_accuracy(U"آب", U"آب").distance == 0);
  CHECK(evaluate::char_accuracy(U"", U"").accuracy == 100.0);
  CHECK(evaluate::char_accuracy(U"ab", U"xxxxxxx").accuracy == 0.0);
}

TEST_CASE("corpus aggregation worked example") {
  const auto r = evaluate::evaluate_pairs({{"1", U"abc", U"abd"}, {"2", U"abcdefg", U"abcdef"}}, kArabic);
  CHECK(r.total_distance == 2);
  CHECK(r.gt_chars == 10);
  CHECK(*r.full_accuracy == 80.0);
}

TEST_CASE("punctuation and space errors only touch the full score") {
  const auto r = evaluate::evaluate_pairs(
      {{"1", U"كتب الولد، الدرس.", U"كتب الولد الدرس"}, {"2", U"قال: نعم", U"قال نعم!"}}, kArabic);
  CHECK(*r.script_accuracy == 100.0);
  CHECK(*r.full_accuracy < 100.0);
}

TEST_CASE("empty corpora have no accuracy") {
  const auto r = evaluate::evaluate_pairs({}, kArabic);
  CHECK_FALSE(r.full_accuracy.has_value());
  CHECK_FALSE(r.script_accuracy.has_value());
  CHECK(r.to_json()["full_accuracy"].is_null());
}

TEST_CASE("aggregates are sums and ignore line order") {
  Rng rng(14);
  const std::u32string pool = U"ابتث .a";
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LineRecord> lines;
    for (int i = 0, n = rng.between(1, 12); i < n; ++i) {
      lines.push_back({std::to_string(i), random_text(rng, pool, 15), random_text(rng, pool, 15)});
    }
    const auto r = evaluate::evaluate_pairs(lines, kArabic);
    long sum = 0, script_sum = 0;
    for (const auto& l : r.lines) {
      sum += l.distance;
      script_sum += l.script_distance;
    }
    CHECK(sum == r.total_distance);
    CHECK(script_sum == r.total_script_distance);
    if (r.full_accuracy) CHECK((*r.full_accuracy >= 0.0 && *r.full_accuracy <= 100.0));

    std::reverse(lines.begin(), lines.end());
    const auto s = evaluate::evaluate_pairs(lines, kArabic);
    CHECK(s.total_distance == r.total_distance);
    CHECK(s.full_accuracy == r.full_accuracy);
    CHECK(s.script_accuracy == r.script_accuracy);
  }
}

TEST_CASE("confusions are counted and ranked") {
  const auto r = evaluate::evaluate_pairs({{"1", U"abab", U"acac"}, {"2", U"ab", U"a"}}, kArabic, 5);
  REQUIRE(r.confusions.size() == 2);
  CHECK(r.confusions[0].gt == U"b");
  CHECK(r.confusions[0].hyp == U"c");
  CHECK(r.confusions[0].count == 2);
  CHECK(r.confusions[1].hyp.empty());
}

TEST_CASE("table and csv rendering") {
  const std::vector<evaluate::TableRow> rows{{"base", "base", "high", "training", 98.25, 99.5},
                                             {"base", "derived", "low", "testing", std::nullopt, 80.0}};
  const auto table = evaluate::format_table(rows);
  CHECK(table.find("Model") != std::string::npos);
  CHECK(table.find("98.25") != std::string::npos);
  CHECK(table.find("derived") != std::string::npos);
  const auto csv = evaluate::format_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("base,base,high,training,98.25,99.50") != std::string::npos);
}
