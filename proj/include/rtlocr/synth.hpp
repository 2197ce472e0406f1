// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic corpus of a connected right-to-left pseudo-script.
//
// Text is real Arabic codepoints (letters, harakat, punctuation) so the codec,
// the reordering rule and the script-only filter see what they would on real
// data. Images are drawn procedurally from stroke recipes: letters take
// joining forms, joined letters are linked by baseline kashidas of random
// length, some letter pairs fuse into ligatures, and marks sit above or below
// their base. A Typeface bundles the knobs that make one "edition" differ
// from another: glyph geometry, kashida range, mark and punctuation density,
// spacing and the ligature inventory.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlocr/dataset.hpp"
#include "rtlocr/imaging.hpp"

namespace rtlocr::synth {

struct Stroke {
  enum class Kind { kLine, kArc, kDot };
  Kind kind = Kind::kLine;
  // line: x0 y0 x1 y1; arc: cx cy rx ry deg0 deg1; dot: cx cy r (r = 0 -> typeface default)
  std::array<double, 6> v{};

  friend bool operator==(const Stroke&, const Stroke&) = default;
};

enum class Joining { kNone, kRight, kDual };

struct GlyphRecipe {
  std::u32string chars;  // one letter, or two for a ligature
  std::string name;
  Joining joining = Joining::kNone;
  double advance = 0.0;
  std::vector<Stroke> body;
  double tail_width = 0.0;  // drawn left of the body when not joined on the left
  std::vector<Stroke> tail;
  double mark_dx = 0.0;

  friend bool operator==(const GlyphRecipe&, const GlyphRecipe&) = default;
};

struct MarkRecipe {
  char32_t cp = 0;
  std::string name;
  bool above = true;
  std::vector<Stroke> strokes;  // x relative to the base glyph centre

  friend bool operator==(const MarkRecipe&, const MarkRecipe&) = default;
};

struct Typeface {
  std::string id;
  double stroke_width = 0.055;  // em
  double dot_radius = 0.036;    // em
  std::pair<int, int> kashida_px{1, 3};
  double mark_density = 0.08;         // P(mark after a letter)
  double punctuation_density = 0.1;   // P(punctuation after a word)
  double letter_gap = 0.05;           // em between unjoined glyphs
  std::pair<double, double> space{0.2, 0.26};  // em
  std::pair<int, int> word_letters{1, 6};
  std::vector<GlyphRecipe> glyphs;
  std::vector<MarkRecipe> marks;
  std::vector<GlyphRecipe> ligature_pool;
  std::vector<std::u32string> ligatures;  // enabled pairs, each in ligature_pool

  /// The built-in typeface (compiled in from data/typefaces/base.json).
  static Typeface base();
  static Typeface from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const GlyphRecipe* glyph(char32_t c) const;
  const GlyphRecipe* ligature(char32_t first, char32_t second) const;
  const MarkRecipe* mark(char32_t c) const;

  std::u32string letters() const;
  std::u32string punctuation() const;

  friend bool operator==(const Typeface&, const Typeface&) = default;
};

/// A related typeface: jittered glyph geometry, a wider kashida range, denser
/// marks and punctuation, looser spacing and extra ligatures. Seed 0 returns
/// `base` unchanged.
Typeface derive_typeface(const Typeface& base, std::uint64_t mutation_seed);

enum class Quality { kHigh, kLow };
std::string_view quality_name(Quality q);
Quality parse_quality(std::string_view name);

struct QualityProfile {
  Quality mode = Quality::kHigh;
  double downscale = 1.5;        // low: render this much smaller, threshold, scale back
  double speckle = 0.001;        // low: probability of a stray ink pixel
};

struct CorpusConfig {
  std::size_t lines = 100;
  std::uint64_t seed = 1;
  std::pair<int, int> text_length{15, 60};  // codepoints per line
  int line_height = imaging::kDefaultLineHeight;
  double pixels_per_em = 52.0;
  std::pair<double, double> type_size{0.75, 1.15};  // per-line point size relative to pixels_per_em
  double ink_jitter = 0.35;   // per-line stroke weight factor in [1 - j, 1 + j]
  double max_blur = 1.2;      // per-line optical blur sigma in [0, max] px at pixels_per_em
  double max_contrast = 6.0;  // per-line exposure: grey levels stretched about 0.5 by [1, max]
  double paper_noise = 0.06;  // uniform grey noise amplitude before binarization
};

/// Logical-order text of line `index`.
std::u32string generate_text(const Typeface& tf, const CorpusConfig& cfg, std::size_t index);

/// Page-convention raster of one line at the profile's resolution (low
/// quality already degraded), before height normalization.
imaging::GrayImage render_line(const Typeface& tf, std::u32string_view text, const QualityProfile& quality,
                               const CorpusConfig& cfg, std::uint64_t line_seed);

/// Deterministic for fixed arguments. Ids are "<typeface>-<quality>-<seed>-NNNNN".
Dataset generate_corpus(const Typeface& tf, const QualityProfile& quality, const CorpusConfig& cfg);

/// Stacks rendered lines into one page with blank leading between them.
imaging::GrayImage compose_page(const std::vector<imaging::GrayImage>& lines, int leading = 12, int margin = 16);

/// Writes <id>.png / <id>.gt.txt pairs plus corpus.json.
void write_corpus(const Dataset& data, const Typeface& tf, const QualityProfile& quality, const CorpusConfig& cfg,
                  const std::filesystem::path& dir);

}  // namespace rtlocr::synth
