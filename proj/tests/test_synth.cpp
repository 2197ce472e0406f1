// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>

#include "rtlocr/error.hpp"
#include "rtlocr/script.hpp"
#include "rtlocr/store.hpp"
#include "rtlocr/synth.hpp"
#include "rtlocr/text.hpp"
#include "test_support.hpp"

using namespace rtlocr;
using synth::Quality;

namespace {

synth::CorpusConfig corpus(std::size_t lines, std::uint64_t seed = 1) {
  synth::CorpusConfig cfg;
  cfg.lines = lines;
  cfg.seed = seed;
  return cfg;
}

const synth::QualityProfile kLow{Quality::kLow};

// Vertical extent of every stroke, in em.
void for_each_y(const std::vector<synth::Stroke>& strokes, auto&& fn) {
  for (const auto& s : strokes) {
    switch (s.kind) {
      case synth::Stroke::Kind::kLine:
        fn(s.v[1]);
        fn(s.v[3]);
        break;
      case synth::Stroke::Kind::kArc:
        fn(s.v[1] - std::abs(s.v[3]));
        fn(s.v[1] + std::abs(s.v[3]));
        break;
      case synth::Stroke::Kind::kDot:
        fn(s.v[1]);
        break;
    }
  }
}

struct Rates {
  double hits = 0, trials = 0;
  bool within_3_sigma(double p) const {
    return std::abs(hits - p * trials) <= 3.0 * std::sqrt(trials * p * (1.0 - p));
  }
};

}  // namespace

TEST_CASE("base typeface is well formed") {
  const auto tf = synth::Typeface::base();
  CHECK(tf.id == "base");
  CHECK(tf.glyphs.size() >= 24);
  CHECK(tf.letters().size() >= 24);
  CHECK_FALSE(tf.marks.empty());
  CHECK_FALSE(tf.punctuation().empty());
  CHECK((tf.mark_density >= 0.0 && tf.mark_density <= 1.0));
  CHECK((tf.punctuation_density >= 0.0 && tf.punctuation_density <= 1.0));
  auto in_box = [](double y) { CHECK((y >= 0.0 && y <= 1.0)); };
  for (const auto& g : tf.glyphs) {
    CHECK(g.advance > 0.0);
    CHECK(g.advance <= 1.0);
    for_each_y(g.body, in_box);
    for_each_y(g.tail, in_box);
  }
  for (const auto& m : tf.marks) for_each_y(m.strokes, in_box);
  for (const auto& pair : tf.ligatures) CHECK(tf.ligature(pair[0], pair[1]) != nullptr);
  CHECK(tf.glyph(U'ب') != nullptr);
  CHECK(tf.mark(U'َ') != nullptr);
  CHECK(tf.glyph(U'x') == nullptr);
}

TEST_CASE("typeface json round-trips and rejects bad strokes") {
  const auto tf = synth::Typeface::base();
  CHECK(synth::Typeface::from_json(tf.to_json()) == tf);
  auto j = tf.to_json();
  j["glyphs"][0]["body"][0][0] = "spline";
  CHECK_THROWS_AS(synth::Typeface::from_json(j), Error);
  const auto derived = synth::derive_typeface(tf, 7);
  CHECK(synth::Typeface::from_json(derived.to_json()) == derived);
}

TEST_CASE("derived typefaces") {
  const auto base = synth::Typeface::base();
  CHECK(synth::derive_typeface(base, 0) == base);
  for (std::uint64_t seed : {1, 7, 11}) {
    const auto d = synth::derive_typeface(base, seed);
    CHECK(d.id == "base-d" + std::to_string(seed));
    CHECK(d.kashida_px != base.kashida_px);
    CHECK(d.kashida_px.second > base.kashida_px.second);
    CHECK(d.mark_density > base.mark_density);
    CHECK((d.mark_density >= 0.0 && d.mark_density <= 1.0));
    CHECK((d.punctuation_density >= 0.0 && d.punctuation_density <= 1.0));
    CHECK(d.ligatures.size() >= base.ligatures.size());
    CHECK(d.letters() == base.letters());
    int changed = 0;
    for (size_t i = 0; i < base.glyphs.size(); ++i) changed += d.glyphs[i] == base.glyphs[i] ? 0 : 1;
    CHECK(changed >= 1);
    CHECK(synth::derive_typeface(base, seed) == d);
  }
}

TEST_CASE("quality names") {
  CHECK(synth::quality_name(Quality::kLow) == "low");
  CHECK(synth::parse_quality("high") == Quality::kHigh);
  CHECK_THROWS_AS(synth::parse_quality("medium"), Error);
}

TEST_CASE("corpus generation is deterministic and follows the contract") {
  const auto tf = synth::Typeface::base();
  const auto a = synth::generate_corpus(tf, {}, corpus(100));
  const auto b = synth::generate_corpus(tf, {}, corpus(100));
  REQUIRE(a.size() == 100);
  std::set<std::string> ids;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].image == b[i].image);
    CHECK(a[i].text.size() >= 15);
    CHECK(a[i].text.size() <= 60);
    CHECK(a[i].image.height() == 48);
    CHECK(a[i].source_id == "base");
    CHECK_FALSE(text::is_separator(a[i].text.back()));
    CHECK(a[i].text == text::nfc(a[i].text));
    ids.insert(a[i].id);
  }
  CHECK(ids.size() == 100);
  CHECK(a[0].id == "base-high-1-00000");
  CHECK(synth::generate_corpus(tf, {}, corpus(3, 2))[0].text != a[0].text);
}

TEST_CASE("low quality lines are bilevel") {
  const auto data = synth::generate_corpus(synth::Typeface::base(), kLow, corpus(30));
  for (const auto& s : data) {
    CHECK(((s.image.pixels.array() == 0.0f) || (s.image.pixels.array() == 1.0f)).all());
  }
}

TEST_CASE("texts stay inside the typeface and round-trip through the codec") {
  const auto tf = synth::derive_typeface(synth::Typeface::base(), 7);
  const auto data = synth::generate_corpus(tf, {}, corpus(200));
  const auto codec = script::build_codec(texts_of(data));
  std::u32string allowed = tf.letters() + tf.punctuation() + U" ";
  for (const auto& m : tf.marks) allowed += m.cp;
  for (const auto& s : data) {
    for (char32_t c : s.text) CHECK(allowed.find(c) != std::u32string::npos);
    CHECK(script::decode_labels(script::encode(s.text, codec), codec) == s.text);
  }
}

TEST_CASE("mark and punctuation rates match the typeface densities") {
  for (std::uint64_t mutation : {0, 7}) {
    const auto tf = synth::derive_typeface(synth::Typeface::base(), mutation);
    const auto letters = tf.letters(), punct = tf.punctuation();
    auto is_letter = [&](char32_t c) { return letters.find(c) != std::u32string::npos; };
    auto is_punct = [&](char32_t c) { return punct.find(c) != std::u32string::npos; };
    Rates marks, stops;
    auto cfg = corpus(600, 5);
    for (size_t i = 0; i < cfg.lines; ++i) {
      const auto t = synth::generate_text(tf, cfg, i);
      // The final character may have lost its follower to truncation, so it is not counted.
      for (size_t k = 0; k + 1 < t.size(); ++k) {
        if (is_letter(t[k])) {
          marks.trials += 1;
          marks.hits += tf.mark(t[k + 1]) ? 1 : 0;
        }
        const bool word_end = (is_letter(t[k]) || tf.mark(t[k])) && (t[k + 1] == U' ' || is_punct(t[k + 1]));
        if (word_end) {
          stops.trials += 1;
          stops.hits += is_punct(t[k + 1]) ? 1 : 0;
        }
      }
    }
    CHECK(marks.trials > 1000);
    CHECK(marks.within_3_sigma(tf.mark_density));
    CHECK(stops.within_3_sigma(tf.punctuation_density));
  }
}

TEST_CASE("each rendered line segments back into one line") {
  for (Quality q : {Quality::kHigh, Quality::kLow}) {
    const auto data = synth::generate_corpus(synth::Typeface::base(), {q}, corpus(40, 3));
    for (const auto& s : data) {
      const auto page = imaging::binarize_otsu(imaging::to_page(s.image)).image;
      CHECK(imaging::segment_lines(page).size() == 1);
    }
  }
}

TEST_CASE("composed pages segment into the generated line count") {
  const auto tf = synth::Typeface::base();
  const auto cfg = corpus(12, 4);
  std::vector<imaging::GrayImage> lines;
  for (size_t i = 0; i < cfg.lines; ++i) {
    lines.push_back(synth::render_line(tf, synth::generate_text(tf, cfg, i), {}, cfg, 1000 + i));
  }
  const auto page = synth::compose_page(lines);
  const auto bilevel = imaging::binarize_otsu(page).image;
  CHECK(imaging::segment_lines(bilevel).size() == lines.size());
}

TEST_CASE("written corpora load back with their manifest") {
  const auto tf = synth::Typeface::base();
  const auto cfg = corpus(5, 9);
  const auto data = synth::generate_corpus(tf, kLow, cfg);
  test::TempDir dir;
  synth::write_corpus(data, tf, kLow, cfg, dir.path);
  const auto manifest = nlohmann::json::parse(test::slurp(dir.path / "corpus.json"));
  CHECK(manifest["typeface_id"] == "base");
  CHECK(manifest["quality"] == "low");
  CHECK(manifest["seed"] == 9);
  CHECK(manifest["lines"] == 5);
  CHECK(synth::Typeface::from_json(manifest["typeface"]) == tf);
  const auto back = store::load_dataset(dir.path);
  REQUIRE(back.size() == data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].id == data[i].id);
    CHECK(back[i].text == data[i].text);
    CHECK(back[i].image == data[i].image);
  }
}
