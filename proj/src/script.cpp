// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/script.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "rtlocr/error.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::script {

Codec::Codec(std::u32string chars) {
  std::u32string normalized = text::nfc(chars);
  std::set<char32_t> unique(normalized.begin(), normalized.end());
  chars_.assign(unique.begin(), unique.end());
  for (size_t i = 0; i < chars_.size(); ++i) index_.emplace(chars_[i], static_cast<Label>(i + 1));
}

std::optional<Label> Codec::label(char32_t c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

char32_t Codec::character(Label label) const {
  if (label <= kBlank || label > size()) {
    throw Error(Errc::kUnknownLabel, "label " + std::to_string(label) + " outside [1, " +
                                         std::to_string(size()) + "]");
  }
  return chars_[static_cast<size_t>(label - 1)];
}

Codec build_codec(std::span<const std::u32string> corpus) {
  std::u32string all;
  for (const auto& line : corpus) all += text::nfc(line);
  if (all.empty()) throw Error(Errc::kEmptyCorpus, "corpus contains no characters");
  return Codec(std::move(all));
}

Codec build_codec(std::span<const std::string> corpus_utf8) {
  std::vector<std::u32string> lines;
  lines.reserve(corpus_utf8.size());
  for (const auto& s : corpus_utf8) lines.push_back(text::utf8_to_u32(s));
  return build_codec(lines);
}

// ---- reordering -------------------------------------------------------------

namespace {

bool in_rtl_block(char32_t c) {
  return (c >= 0x0590 && c <= 0x08FF) || (c >= 0xFB1D && c <= 0xFDFF) || (c >= 0xFE70 && c <= 0xFEFF) ||
         (c >= 0x10800 && c <= 0x10FFF) || (c >= 0x1E800 && c <= 0x1EFFF);
}

bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9);
}

std::vector<Direction> resolve(std::u32string_view s, Direction base) {
  const size_t n = s.size();
  std::vector<CharClass> cls(n);
  for (size_t i = 0; i < n; ++i) cls[i] = classify(s[i]);

  const CharClass other = base == Direction::kRtl ? CharClass::kLtr : CharClass::kRtl;
  const Direction other_dir = base == Direction::kRtl ? Direction::kLtr : Direction::kRtl;
  std::vector<Direction> dir(n, base);
  for (size_t i = 0; i < n;) {
    if (cls[i] != CharClass::kNeutral) {
      dir[i] = cls[i] == CharClass::kLtr ? Direction::kLtr : Direction::kRtl;
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && cls[j] == CharClass::kNeutral) ++j;
    const bool left_other = i > 0 && cls[i - 1] == other;
    const bool right_other = j < n && cls[j] == other;
    const Direction d = left_other && right_other ? other_dir : base;
    std::fill(dir.begin() + static_cast<std::ptrdiff_t>(i), dir.begin() + static_cast<std::ptrdiff_t>(j), d);
    i = j;
  }
  return dir;
}

}  // namespace

CharClass classify(char32_t c) {
  if (is_digit(c)) return CharClass::kLtr;
  if (text::is_separator(c) || text::is_punctuation(c)) return CharClass::kNeutral;
  if (in_rtl_block(c)) return CharClass::kRtl;
  const auto cp = static_cast<UChar32>(c);
  if (u_isalpha(cp) || u_charType(cp) == U_NON_SPACING_MARK) return CharClass::kLtr;
  return CharClass::kNeutral;
}

std::vector<std::size_t> reorder_permutation(std::u32string_view text, Direction base) {
  std::vector<Direction> dir = resolve(text, base);
  std::vector<std::size_t> perm(text.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  if (base == Direction::kRtl) {
    std::reverse(perm.begin(), perm.end());
    std::reverse(dir.begin(), dir.end());
  }
  const Direction inner = base == Direction::kRtl ? Direction::kLtr : Direction::kRtl;
  for (size_t i = 0; i < perm.size();) {
    if (dir[i] != inner) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < perm.size() && dir[j] == inner) ++j;
    std::reverse(perm.begin() + static_cast<std::ptrdiff_t>(i), perm.begin() + static_cast<std::ptrdiff_t>(j));
    i = j;
  }
  return perm;
}

std::u32string to_display_order(std::u32string_view logical, Direction base) {
  const auto perm = reorder_permutation(logical, base);
  std::u32string out(logical.size(), U'\0');
  for (size_t i = 0; i < perm.size(); ++i) out[i] = logical[perm[i]];
  return out;
}

std::u32string to_logical_order(std::u32string_view display, Direction base) {
  return to_display_order(display, base);
}

std::vector<Label> encode(std::u32string_view logical, const Codec& codec) {
  const std::u32string display = to_display_order(logical);
  std::vector<Label> labels;
  labels.reserve(display.size());
  for (char32_t c : display) {
    auto l = codec.label(c);
    if (!l) {
      // Report the position in logical order.
      const auto pos = logical.find(c);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
      throw Error(Errc::kUnknownChar, std::string(buf) + " at position " + std::to_string(pos));
    }
    labels.push_back(*l);
  }
  return labels;
}

std::u32string decode_labels(std::span<const Label> labels, const Codec& codec) {
  std::u32string display;
  display.reserve(labels.size());
  for (Label l : labels) display.push_back(codec.character(l));
  return to_logical_order(display);
}

// ---- script filter --------------------------------------------------------------

ScriptFilter ScriptFilter::arabic() {
  return ScriptFilter{{{0x0600, 0x06FF}, {0xFB50, 0xFDFF}, {0xFE70, 0xFEFF}}};
}

ScriptFilter ScriptFilter::parse(std::string_view spec) {
  ScriptFilter f;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string item(spec.substr(pos, comma - pos));
    item.erase(std::remove_if(item.begin(), item.end(), [](char ch) { return ch == ' '; }), item.end());
    if (!item.empty()) {
      const size_t dash = item.find('-');
      try {
        auto hex = [](const std::string& digits) {
          size_t used = 0;
          const unsigned long v = std::stoul(digits, &used, 16);
          if (used != digits.size()) throw std::invalid_argument("trailing characters");
          return v;
        };
        const unsigned long lo = hex(item.substr(0, dash));
        const unsigned long hi = dash == std::string::npos ? lo : hex(item.substr(dash + 1));
        if (hi < lo || hi > 0x10FFFF) throw std::out_of_range("range");
        f.ranges.emplace_back(static_cast<char32_t>(lo), static_cast<char32_t>(hi));
      } catch (const std::exception&) {
        throw Error(Errc::kInvalidConfig, "bad script range '" + item + "'");
      }
    }
    pos = comma + 1;
  }
  if (f.ranges.empty()) throw Error(Errc::kInvalidConfig, "empty script range list");
  return f;
}

std::string ScriptFilter::to_string() const {
  std::string out;
  char buf[32];
  for (const auto& [lo, hi] : ranges) {
    std::snprintf(buf, sizeof(buf), "%s%04X-%04X", out.empty() ? "" : ",", static_cast<unsigned>(lo),
                  static_cast<unsigned>(hi));
    out += buf;
  }
  return out;
}

bool ScriptFilter::in_target(char32_t c) const {
  return std::any_of(ranges.begin(), ranges.end(), [c](const auto& r) { return c >= r.first && c <= r.second; });
}

bool ScriptFilter::keeps(char32_t c) const {
  return in_target(c) && !text::is_separator(c) && !text::is_punctuation(c);
}

std::u32string script_only(std::u32string_view text, const ScriptFilter& filter) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (filter.keeps(c)) out.push_back(c);
  }
  return out;
}

}  // namespace rtlocr::script
