// SPDX-License-Identifier: Apache-2.0
//
// Character accuracy, computed the way the accuracy tables are reported: once
// over the full text and once over the script characters only.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlocr/dataset.hpp"
#include "rtlocr/model.hpp"
#include "rtlocr/script.hpp"

namespace rtlocr::evaluate {

/// Unit-cost Levenshtein distance over codepoints.
int levenshtein(std::u32string_view a, std::u32string_view b);

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

struct EditOp {
  EditKind kind;
  char32_t gt = 0;   // 0 for insertions
  char32_t hyp = 0;  // 0 for deletions
};

/// One optimal alignment of gt against hyp. Where several are optimal the
/// backtrace prefers match/substitution, then deletion, then insertion.
std::vector<EditOp> align(std::u32string_view gt, std::u32string_view hyp);

struct CharAccuracy {
  int distance = 0;
  double accuracy = 0.0;  // percent
};

/// Both sides NFC-normalized; accuracy = 100 * (1 - d / max(|gt|, 1)), >= 0.
CharAccuracy char_accuracy(std::u32string_view gt, std::u32string_view hyp);

struct LineRecord {
  std::string id;
  std::u32string gt;
  std::u32string hyp;
  int distance = 0;
  int script_distance = 0;
  double confidence = 1.0;
};

struct Confusion {
  std::u32string gt;   // empty for insertions
  std::u32string hyp;  // empty for deletions
  int count = 0;
};

struct EvalReport {
  std::optional<double> full_accuracy;    // percent; empty when there are no lines
  std::optional<double> script_accuracy;  // percent
  long total_distance = 0;
  long total_script_distance = 0;
  long gt_chars = 0;
  long gt_script_chars = 0;
  std::vector<LineRecord> lines;
  std::vector<Confusion> confusions;  // most frequent first

  nlohmann::json to_json() const;
};

/// Corpus-aggregated accuracy from per-line pairs, in the given order.
EvalReport evaluate_pairs(std::vector<LineRecord> lines, const script::ScriptFilter& filter,
                          std::size_t top_confusions = 20);

/// Recognizes every sample and scores it. `jobs` > 1 spreads lines over
/// threads; results are always reduced in dataset order.
EvalReport evaluate(const OcrModel& model, const Dataset& data, const script::ScriptFilter& filter,
                    int jobs = 1, std::size_t top_confusions = 20);

/// One row of an accuracy table: a model applied to one work.
struct TableRow {
  std::string model;
  std::string work;
  std::string quality;
  std::string role;  // training | testing
  std::optional<double> full;
  std::optional<double> script;
};

/// Aligned plain-text table: Model | Work | Quality | Type | Full | Ar.
std::string format_table(const std::vector<TableRow>& rows);
std::string format_csv(const std::vector<TableRow>& rows);

}  // namespace rtlocr::evaluate
