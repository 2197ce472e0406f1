// SPDX-License-Identifier: Apache-2.0
//
// Character codec, simplified bidirectional reordering, and the script-only
// filter used by the "script accuracy" metric.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rtlocr::script {

using Label = int;
inline constexpr Label kBlank = 0;

/// Dense character <-> label mapping. Label 0 is the CTC blank; the i-th
/// character (sorted by codepoint) has label i + 1.
class Codec {
 public:
  Codec() = default;
  /// Characters are normalized, deduplicated and sorted.
  explicit Codec(std::u32string chars);

  const std::u32string& chars() const { return chars_; }
  int size() const { return static_cast<int>(chars_.size()); }
  int num_classes() const { return size() + 1; }

  std::optional<Label> label(char32_t c) const;
  char32_t character(Label label) const;  // throws UnknownLabel

  friend bool operator==(const Codec& a, const Codec& b) { return a.chars_ == b.chars_; }

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, Label> index_;
};

/// Throws EmptyCorpus when no characters appear after normalization.
Codec build_codec(std::span<const std::u32string> corpus);
Codec build_codec(std::span<const std::string> corpus_utf8);

enum class Direction { kLtr, kRtl };

/// Strong-direction class used by the reordering rule. Latin letters and
/// ASCII / Arabic-Indic / extended Arabic-Indic digits are LTR; Arabic,
/// Syriac, Thaana, Hebrew letters and their marks are RTL; everything else is
/// neutral.
enum class CharClass { kLtr, kRtl, kNeutral };
CharClass classify(char32_t c);

/// Two-pass reordering: with an RTL base the string is reversed and every
/// maximal LTR run is reversed back. A neutral joins the LTR run only when its
/// nearest strong neighbours on both sides are LTR. With an LTR base this is
/// mirrored. The transform is its own inverse.
std::u32string to_display_order(std::u32string_view logical, Direction base = Direction::kRtl);
std::u32string to_logical_order(std::u32string_view display, Direction base = Direction::kRtl);

/// The permutation applied by to_display_order: out[i] = in[perm[i]].
std::vector<std::size_t> reorder_permutation(std::u32string_view text, Direction base = Direction::kRtl);

/// Labels of the display-order text. Throws UnknownChar.
std::vector<Label> encode(std::u32string_view logical, const Codec& codec);
/// Inverse of encode. Throws UnknownLabel (including for the blank).
std::u32string decode_labels(std::span<const Label> labels, const Codec& codec);

/// Which characters count for script-only accuracy.
struct ScriptFilter {
  std::vector<std::pair<char32_t, char32_t>> ranges;  // inclusive

  /// Arabic block plus Arabic presentation forms A and B.
  static ScriptFilter arabic();
  /// Parses "0600-06FF,FB50-FDFF" (hex, inclusive).
  static ScriptFilter parse(std::string_view spec);
  std::string to_string() const;

  bool in_target(char32_t c) const;
  bool keeps(char32_t c) const;
};

/// Drops separators, punctuation and anything outside the target ranges.
std::u32string script_only(std::u32string_view text, const ScriptFilter& filter);

}  // namespace rtlocr::script
