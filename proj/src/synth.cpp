// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "rtlocr/error.hpp"
#include "rtlocr/random.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::synth {

namespace detail {
extern const char* const kBaseTypefaceJson;
}

namespace {

constexpr double kBaseline = 0.66;

char32_t parse_cp(const std::string& hex) {
  try {
    return static_cast<char32_t>(std::stoul(hex, nullptr, 16));
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidConfig, "bad codepoint '" + hex + "' in typeface");
  }
}

std::string cp_hex(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04X", static_cast<unsigned>(c));
  return buf;
}

Stroke parse_stroke(const nlohmann::json& j) {
  const std::string kind = j.at(0).get<std::string>();
  Stroke s;
  size_t n = 0;
  if (kind == "line") {
    s.kind = Stroke::Kind::kLine;
    n = 4;
  } else if (kind == "arc") {
    s.kind = Stroke::Kind::kArc;
    n = 6;
  } else if (kind == "dot") {
    s.kind = Stroke::Kind::kDot;
    n = j.size() - 1;
    if (n != 2 && n != 3) throw Error(Errc::kInvalidConfig, "dot takes 2 or 3 values");
  } else {
    throw Error(Errc::kInvalidConfig, "unknown stroke kind '" + kind + "'");
  }
  if (j.size() != n + 1) throw Error(Errc::kInvalidConfig, "stroke '" + kind + "' has wrong arity");
  for (size_t i = 0; i < n; ++i) s.v[i] = j.at(i + 1).get<double>();
  return s;
}

nlohmann::json stroke_json(const Stroke& s) {
  nlohmann::json j = nlohmann::json::array();
  switch (s.kind) {
    case Stroke::Kind::kLine:
      j.push_back("line");
      for (int i = 0; i < 4; ++i) j.push_back(s.v[i]);
      break;
    case Stroke::Kind::kArc:
      j.push_back("arc");
      for (int i = 0; i < 6; ++i) j.push_back(s.v[i]);
      break;
    case Stroke::Kind::kDot:
      j.push_back("dot");
      j.push_back(s.v[0]);
      j.push_back(s.v[1]);
      if (s.v[2] > 0) j.push_back(s.v[2]);
      break;
  }
  return j;
}

std::vector<Stroke> parse_strokes(const nlohmann::json& j) {
  std::vector<Stroke> out;
  for (const auto& s : j) out.push_back(parse_stroke(s));
  return out;
}

nlohmann::json strokes_json(const std::vector<Stroke>& strokes) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : strokes) j.push_back(stroke_json(s));
  return j;
}

Joining parse_joining(const std::string& s) {
  if (s == "dual") return Joining::kDual;
  if (s == "right") return Joining::kRight;
  if (s == "none") return Joining::kNone;
  throw Error(Errc::kInvalidConfig, "unknown joining type '" + s + "'");
}

std::string joining_name(Joining j) {
  switch (j) {
    case Joining::kDual: return "dual";
    case Joining::kRight: return "right";
    case Joining::kNone: return "none";
  }
  return "none";
}

void parse_tail(const nlohmann::json& j, GlyphRecipe& g) {
  if (!j.contains("tail")) return;
  g.tail_width = j["tail"].at("width").get<double>();
  g.tail = parse_strokes(j["tail"].at("strokes"));
}

void write_common(const GlyphRecipe& g, nlohmann::json& j) {
  j["name"] = g.name;
  j["advance"] = g.advance;
  j["body"] = strokes_json(g.body);
  if (!g.tail.empty()) j["tail"] = {{"width", g.tail_width}, {"strokes", strokes_json(g.tail)}};
  if (g.mark_dx != 0.0) j["mark_dx"] = g.mark_dx;
}

// ---- rasterization --------------------------------------------------------------

struct Primitive {
  double x0, y0, x1, y1;  // segment endpoints in pixels (equal for disks)
  double radius;          // half stroke width or disk radius
};

class Canvas {
 public:
  Canvas(double ppe, double stroke_width, double dot_radius)
      : ppe_(ppe), half_width_(0.5 * stroke_width * ppe), dot_radius_(dot_radius * ppe) {}

  // Adds em-unit strokes with the glyph origin at pixel x = origin_x.
  void add(const std::vector<Stroke>& strokes, double origin_x) {
    for (const auto& s : strokes) add(s, origin_x);
  }

  void add(const Stroke& s, double origin_x) {
    auto px = [&](double x) { return origin_x + x * ppe_; };
    auto py = [&](double y) { return y * ppe_; };
    switch (s.kind) {
      case Stroke::Kind::kLine:
        prims_.push_back({px(s.v[0]), py(s.v[1]), px(s.v[2]), py(s.v[3]), half_width_});
        break;
      case Stroke::Kind::kArc: {
        const double a0 = s.v[4] * std::numbers::pi / 180.0;
        const double a1 = s.v[5] * std::numbers::pi / 180.0;
        const int steps = std::max(6, static_cast<int>(std::ceil(std::abs(s.v[5] - s.v[4]) / 12.0)));
        double prev_x = px(s.v[0] + s.v[2] * std::cos(a0));
        double prev_y = py(s.v[1] + s.v[3] * std::sin(a0));
        for (int i = 1; i <= steps; ++i) {
          const double a = a0 + (a1 - a0) * i / steps;
          const double x = px(s.v[0] + s.v[2] * std::cos(a));
          const double y = py(s.v[1] + s.v[3] * std::sin(a));
          prims_.push_back({prev_x, prev_y, x, y, half_width_});
          prev_x = x;
          prev_y = y;
        }
        break;
      }
      case Stroke::Kind::kDot: {
        const double r = s.v[2] > 0 ? s.v[2] * ppe_ : dot_radius_;
        prims_.push_back({px(s.v[0]), py(s.v[1]), px(s.v[0]), py(s.v[1]), r});
        break;
      }
    }
  }

  void add_segment_px(double x0, double y0, double x1, double y1) {
    prims_.push_back({x0, y0, x1, y1, half_width_});
  }

  double min_x() const {
    double m = 0.0;
    for (const auto& p : prims_) m = std::min({m, p.x0 - p.radius, p.x1 - p.radius});
    return m;
  }
  double max_x() const {
    double m = 0.0;
    for (const auto& p : prims_) m = std::max({m, p.x0 + p.radius, p.x1 + p.radius});
    return m;
  }

  // Page-convention image; pixel centres at (x + 0.5, y + 0.5) after shifting
  // by (dx, dy).
  imaging::GrayImage rasterize(int width, int height, double dx, double dy) const {
    Eigen::MatrixXf ink = Eigen::MatrixXf::Zero(height, width);
    for (const auto& p : prims_) {
      const double x0 = p.x0 + dx, y0 = p.y0 + dy, x1 = p.x1 + dx, y1 = p.y1 + dy;
      const double reach = p.radius + 1.0;
      const int cx0 = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - reach)));
      const int cx1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(x0, x1) + reach)));
      const int cy0 = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - reach)));
      const int cy1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(y0, y1) + reach)));
      const double ex = x1 - x0, ey = y1 - y0;
      const double len2 = ex * ex + ey * ey;
      for (int y = cy0; y <= cy1; ++y) {
        for (int x = cx0; x <= cx1; ++x) {
          const double qx = x + 0.5 - x0, qy = y + 0.5 - y0;
          const double t = len2 > 0 ? std::clamp((qx * ex + qy * ey) / len2, 0.0, 1.0) : 0.0;
          const double d = std::hypot(qx - t * ex, qy - t * ey);
          const float cover = static_cast<float>(std::clamp(p.radius + 0.5 - d, 0.0, 1.0));
          ink(y, x) = std::max(ink(y, x), cover);
        }
      }
    }
    return imaging::GrayImage(Eigen::MatrixXf((1.0f - ink.array()).matrix()));
  }

 private:
  double ppe_;
  double half_width_;
  double dot_radius_;
  std::vector<Primitive> prims_;
};

Eigen::MatrixXf gaussian_blur(const Eigen::MatrixXf& m, double sigma) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<float> k(2 * r + 1);
  float sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
  for (auto& v : k) v /= sum;
  const auto rows = m.rows(), cols = m.cols();
  // Paper is white past the edges.
  auto blur_pass = [&](const Eigen::MatrixXf& in, bool horizontal) {
    Eigen::MatrixXf out(rows, cols);
    for (Eigen::Index y = 0; y < rows; ++y) {
      for (Eigen::Index x = 0; x < cols; ++x) {
        float acc = 0;
        for (int i = -r; i <= r; ++i) {
          const Eigen::Index sy = horizontal ? y : y + i, sx = horizontal ? x + i : x;
          acc += k[i + r] * ((sy < 0 || sy >= rows || sx < 0 || sx >= cols) ? 1.0f : in(sy, sx));
        }
        out(y, x) = acc;
      }
    }
    return out;
  };
  return blur_pass(blur_pass(m, true), false);
}

struct Cluster {
  const GlyphRecipe* glyph = nullptr;  // null for a space
  std::vector<const MarkRecipe*> marks;
};

bool joins_right(const Cluster& c) { return c.glyph && c.glyph->joining != Joining::kNone; }
bool joins_left(const Cluster& c) { return c.glyph && c.glyph->joining == Joining::kDual; }

std::vector<Cluster> shape(const Typeface& tf, std::u32string_view text) {
  std::vector<Cluster> clusters;
  for (size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (text::is_separator(c)) {
      clusters.push_back({});
      continue;
    }
    if (const MarkRecipe* m = tf.mark(c)) {
      if (!clusters.empty() && clusters.back().glyph) clusters.back().marks.push_back(m);
      continue;
    }
    if (i + 1 < text.size()) {
      if (const GlyphRecipe* lig = tf.ligature(c, text[i + 1])) {
        clusters.push_back({lig, {}});
        ++i;
        continue;
      }
    }
    const GlyphRecipe* g = tf.glyph(c);
    if (!g) throw Error(Errc::kInvalidArgument, "typeface '" + tf.id + "' has no glyph for U+" + cp_hex(c));
    clusters.push_back({g, {}});
  }
  return clusters;
}

void jitter(std::vector<Stroke>& strokes, Rng& rng, double amount, double advance) {
  for (auto& s : strokes) {
    const int coords = s.kind == Stroke::Kind::kLine ? 4 : 2;
    for (int i = 0; i < coords; ++i) {
      s.v[i] += rng.uniform(-amount, amount);
      s.v[i] = (i % 2 == 0) ? std::clamp(s.v[i], 0.0, std::max(advance, 0.0)) : std::clamp(s.v[i], 0.08, 0.92);
    }
    if (s.kind == Stroke::Kind::kArc) {
      s.v[2] = std::max(0.02, s.v[2] * rng.uniform(0.8, 1.25));
      s.v[3] = std::max(0.02, s.v[3] * rng.uniform(0.8, 1.25));
    }
  }
}

}  // namespace

// ---- typeface ---------------------------------------------------------------------

Typeface Typeface::from_json(const nlohmann::json& j) {
  try {
    Typeface tf;
    tf.id = j.at("id").get<std::string>();
    tf.stroke_width = j.at("stroke_width").get<double>();
    tf.dot_radius = j.at("dot_radius").get<double>();
    tf.kashida_px = {j.at("kashida_px").at(0).get<int>(), j.at("kashida_px").at(1).get<int>()};
    tf.mark_density = j.at("mark_density").get<double>();
    tf.punctuation_density = j.at("punctuation_density").get<double>();
    tf.letter_gap = j.at("letter_gap").get<double>();
    tf.space = {j.at("space").at(0).get<double>(), j.at("space").at(1).get<double>()};
    tf.word_letters = {j.at("word_letters").at(0).get<int>(), j.at("word_letters").at(1).get<int>()};
    for (const auto& gj : j.at("glyphs")) {
      GlyphRecipe g;
      g.chars = std::u32string(1, parse_cp(gj.at("cp").get<std::string>()));
      g.name = gj.value("name", "");
      g.joining = parse_joining(gj.at("joining").get<std::string>());
      g.advance = gj.at("advance").get<double>();
      g.body = parse_strokes(gj.at("body"));
      g.mark_dx = gj.value("mark_dx", 0.0);
      parse_tail(gj, g);
      tf.glyphs.push_back(std::move(g));
    }
    for (const auto& mj : j.at("marks")) {
      MarkRecipe m;
      m.cp = parse_cp(mj.at("cp").get<std::string>());
      m.name = mj.value("name", "");
      m.above = mj.at("place").get<std::string>() == "above";
      m.strokes = parse_strokes(mj.at("strokes"));
      tf.marks.push_back(std::move(m));
    }
    for (const auto& lj : j.at("ligature_pool")) {
      GlyphRecipe g;
      for (const auto& c : lj.at("chars")) g.chars.push_back(parse_cp(c.get<std::string>()));
      if (g.chars.size() != 2) throw Error(Errc::kInvalidConfig, "ligatures fuse exactly two letters");
      g.name = lj.value("name", "");
      g.advance = lj.at("advance").get<double>();
      g.body = parse_strokes(lj.at("body"));
      g.mark_dx = lj.value("mark_dx", 0.0);
      parse_tail(lj, g);
      tf.ligature_pool.push_back(std::move(g));
    }
    // A ligature joins on the right like its first letter and on the left
    // like its second.
    for (auto& lig : tf.ligature_pool) {
      const GlyphRecipe* second = tf.glyph(lig.chars[1]);
      const GlyphRecipe* first = tf.glyph(lig.chars[0]);
      if (!first || !second) throw Error(Errc::kInvalidConfig, "ligature '" + lig.name + "' uses unknown letters");
      lig.joining = second->joining == Joining::kDual ? Joining::kDual : Joining::kRight;
    }
    for (const auto& pair : j.at("ligatures")) {
      std::u32string chars;
      for (const auto& c : pair) chars.push_back(parse_cp(c.get<std::string>()));
      if (chars.size() != 2 || !tf.ligature(chars[0], chars[1])) {
        // ligature() only consults enabled pairs, so check the pool directly.
        const bool in_pool = std::any_of(tf.ligature_pool.begin(), tf.ligature_pool.end(),
                                         [&](const GlyphRecipe& g) { return g.chars == chars; });
        if (!in_pool) throw Error(Errc::kInvalidConfig, "enabled ligature missing from pool");
      }
      tf.ligatures.push_back(chars);
    }
    return tf;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidConfig, std::string("typeface json: ") + e.what());
  }
}

nlohmann::json Typeface::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["format"] = 1;
  j["stroke_width"] = stroke_width;
  j["dot_radius"] = dot_radius;
  j["kashida_px"] = {kashida_px.first, kashida_px.second};
  j["mark_density"] = mark_density;
  j["punctuation_density"] = punctuation_density;
  j["letter_gap"] = letter_gap;
  j["space"] = {space.first, space.second};
  j["word_letters"] = {word_letters.first, word_letters.second};
  j["glyphs"] = nlohmann::json::array();
  for (const auto& g : glyphs) {
    nlohmann::json gj;
    gj["cp"] = cp_hex(g.chars[0]);
    gj["joining"] = joining_name(g.joining);
    write_common(g, gj);
    j["glyphs"].push_back(gj);
  }
  j["marks"] = nlohmann::json::array();
  for (const auto& m : marks) {
    j["marks"].push_back({{"cp", cp_hex(m.cp)}, {"name", m.name}, {"place", m.above ? "above" : "below"},
                          {"strokes", strokes_json(m.strokes)}});
  }
  j["ligature_pool"] = nlohmann::json::array();
  for (const auto& g : ligature_pool) {
    nlohmann::json gj;
    gj["chars"] = {cp_hex(g.chars[0]), cp_hex(g.chars[1])};
    write_common(g, gj);
    j["ligature_pool"].push_back(gj);
  }
  j["ligatures"] = nlohmann::json::array();
  for (const auto& l : ligatures) j["ligatures"].push_back({cp_hex(l[0]), cp_hex(l[1])});
  return j;
}

Typeface Typeface::base() { return from_json(nlohmann::json::parse(detail::kBaseTypefaceJson)); }

const GlyphRecipe* Typeface::glyph(char32_t c) const {
  for (const auto& g : glyphs) {
    if (g.chars.size() == 1 && g.chars[0] == c) return &g;
  }
  return nullptr;
}

const GlyphRecipe* Typeface::ligature(char32_t first, char32_t second) const {
  const std::u32string key{first, second};
  if (std::find(ligatures.begin(), ligatures.end(), key) == ligatures.end()) return nullptr;
  for (const auto& g : ligature_pool) {
    if (g.chars == key) return &g;
  }
  return nullptr;
}

const MarkRecipe* Typeface::mark(char32_t c) const {
  for (const auto& m : marks) {
    if (m.cp == c) return &m;
  }
  return nullptr;
}

std::u32string Typeface::letters() const {
  std::u32string out;
  for (const auto& g : glyphs) {
    if (g.joining != Joining::kNone) out += g.chars;
  }
  return out;
}

std::u32string Typeface::punctuation() const {
  std::u32string out;
  for (const auto& g : glyphs) {
    if (g.joining == Joining::kNone && text::is_punctuation(g.chars[0])) out += g.chars;
  }
  return out;
}

Typeface derive_typeface(const Typeface& base, std::uint64_t mutation_seed) {
  if (mutation_seed == 0) return base;
  Rng rng(derive_seed(mutation_seed, 0x7F4A));
  Typeface tf = base;
  tf.id = base.id + "-d" + std::to_string(mutation_seed);

  bool changed = false;
  for (auto& g : tf.glyphs) {
    if (g.joining == Joining::kNone) continue;
    if (rng.bernoulli(0.6)) {
      jitter(g.body, rng, 0.025, g.advance);
      g.advance = std::clamp(g.advance * rng.uniform(0.9, 1.2), 0.08, 0.4);
      changed = true;
    }
  }
  if (!changed) jitter(tf.glyphs.front().body, rng, 0.025, tf.glyphs.front().advance);

  tf.stroke_width = base.stroke_width * rng.uniform(0.9, 1.2);
  tf.kashida_px = {base.kashida_px.first, base.kashida_px.second + 3 + static_cast<int>(rng.below(4))};
  tf.mark_density = std::min(0.6, base.mark_density * rng.uniform(2.0, 3.0));
  tf.punctuation_density = std::min(0.5, base.punctuation_density * rng.uniform(1.5, 2.5));
  tf.space = {base.space.first * rng.uniform(0.5, 0.8), base.space.second * rng.uniform(1.2, 1.6)};

  std::vector<const GlyphRecipe*> unused;
  for (const auto& g : tf.ligature_pool) {
    if (std::find(tf.ligatures.begin(), tf.ligatures.end(), g.chars) == tf.ligatures.end()) unused.push_back(&g);
  }
  rng.shuffle(std::span(unused));
  const size_t extra = std::min<size_t>(unused.size(), 3);
  for (size_t i = 0; i < extra; ++i) tf.ligatures.push_back(unused[i]->chars);
  return tf;
}

std::string_view quality_name(Quality q) { return q == Quality::kHigh ? "high" : "low"; }

Quality parse_quality(std::string_view name) {
  if (name == "high") return Quality::kHigh;
  if (name == "low") return Quality::kLow;
  throw Error(Errc::kInvalidArgument, "quality must be 'high' or 'low'");
}

// ---- text -------------------------------------------------------------------------

std::u32string generate_text(const Typeface& tf, const CorpusConfig& cfg, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, 2 * index));
  const std::u32string letters = tf.letters();
  const std::u32string punct = tf.punctuation();
  if (letters.empty()) throw Error(Errc::kInvalidConfig, "typeface has no letters");
  const size_t target = static_cast<size_t>(rng.between(cfg.text_length.first, cfg.text_length.second));

  std::u32string out;
  while (out.size() < target) {
    if (!out.empty()) out.push_back(U' ');
    const int n = rng.between(tf.word_letters.first, tf.word_letters.second);
    for (int i = 0; i < n; ++i) {
      out.push_back(letters[rng.below(letters.size())]);
      if (!tf.marks.empty() && rng.bernoulli(tf.mark_density)) {
        out.push_back(tf.marks[rng.below(tf.marks.size())].cp);
      }
    }
    if (!punct.empty() && rng.bernoulli(tf.punctuation_density)) out.push_back(punct[rng.below(punct.size())]);
  }
  out.resize(target);
  if (text::is_separator(out.back())) out.back() = letters[rng.below(letters.size())];
  return out;
}

// ---- rendering ----------------------------------------------------------------------

imaging::GrayImage render_line(const Typeface& tf, std::u32string_view text, const QualityProfile& quality,
                               const CorpusConfig& cfg, std::uint64_t line_seed) {
  Rng rng(line_seed);
  const double type_size = rng.uniform(cfg.type_size.first, cfg.type_size.second);
  const double nominal = cfg.pixels_per_em * type_size;
  const double ppe = quality.mode == Quality::kLow ? nominal / quality.downscale : nominal;
  const double px_scale = ppe / cfg.pixels_per_em;
  // Ink spread and paper placement vary from line to line on a real page.
  const double ink = rng.uniform(1.0 - cfg.ink_jitter, 1.0 + cfg.ink_jitter);
  Canvas canvas(ppe, tf.stroke_width * ink, tf.dot_radius * ink);
  const double sub_x = rng.uniform(), sub_y = rng.uniform();

  const auto clusters = shape(tf, text);
  double cursor = 0.0;  // right edge of the next glyph, moving left
  for (size_t i = 0; i < clusters.size(); ++i) {
    const Cluster& c = clusters[i];
    if (!c.glyph) {
      cursor -= rng.uniform(tf.space.first, tf.space.second) * ppe;
      continue;
    }
    const bool has_next = i + 1 < clusters.size();
    const bool joins_next = has_next && joins_left(c) && joins_right(clusters[i + 1]);
    const GlyphRecipe& g = *c.glyph;
    const double body_left = cursor - g.advance * ppe;
    canvas.add(g.body, body_left);
    double left = body_left;
    if (!joins_next && !g.tail.empty()) {
      left = body_left - g.tail_width * ppe;
      canvas.add(g.tail, left);
    }
    const double centre = body_left + (0.5 * g.advance + g.mark_dx) * ppe;
    for (const MarkRecipe* m : c.marks) canvas.add(m->strokes, centre);
    cursor = left;
    if (joins_next) {
      const double k = rng.between(tf.kashida_px.first, tf.kashida_px.second) * px_scale;
      canvas.add_segment_px(cursor - k - 0.5, kBaseline * ppe, cursor + 0.5, kBaseline * ppe);
      cursor -= k;
    } else if (has_next && clusters[i + 1].glyph) {
      cursor -= tf.letter_gap * ppe;
    }
  }

  const double pad = 4.0 * px_scale;
  const double lo = canvas.min_x();
  const double hi = canvas.max_x();
  const int width = static_cast<int>(std::ceil(hi - lo + 2 * pad + 1));
  const int height = static_cast<int>(std::ceil(ppe + 2 * pad + 1));
  imaging::GrayImage img = canvas.rasterize(width, height, pad - lo + sub_x, pad + sub_y);
  // Grey scans carry optics blur, exposure differences and paper texture.
  // Bilevel scans only keep what survives the threshold.
  if (quality.mode == Quality::kHigh) {
    const double sigma = rng.uniform(0.0, cfg.max_blur);
    if (sigma > 0.05) img.pixels = gaussian_blur(img.pixels, sigma);
    const float contrast = static_cast<float>(rng.uniform(1.0, cfg.max_contrast));
    for (Eigen::Index k = 0; k < img.pixels.size(); ++k) {
      float& v = img.pixels.data()[k];
      v = std::clamp((v - 0.5f) * contrast + 0.5f, 0.0f, 1.0f);
      if (cfg.paper_noise > 0) {
        v = std::clamp(v + static_cast<float>(rng.uniform(-cfg.paper_noise, cfg.paper_noise)), 0.0f, 1.0f);
      }
    }
  }
  if (quality.mode == Quality::kLow) {
    // Pre-binarized low-resolution scan, resampled back to the nominal size.
    // generate_corpus thresholds again after normalization.
    const Eigen::MatrixXf low = (img.pixels.array() < 0.5f).cast<float>().unaryExpr([](float v) { return 1.0f - v; });
    const int up_h = static_cast<int>(std::lround(height * quality.downscale));
    const int up_w = static_cast<int>(std::lround(width * quality.downscale));
    img = imaging::GrayImage(imaging::resize_bilinear(low, up_h, up_w));
  }
  return img;
}

Dataset generate_corpus(const Typeface& tf, const QualityProfile& quality, const CorpusConfig& cfg) {
  if (cfg.lines == 0) throw Error(Errc::kInvalidArgument, "corpus needs at least one line");
  Dataset data;
  data.reserve(cfg.lines);
  for (std::size_t i = 0; i < cfg.lines; ++i) {
    const std::uint64_t line_seed = derive_seed(cfg.seed, 2 * i + 1);
    LineSample s;
    char id[64];
    std::snprintf(id, sizeof(id), "-%s-%llu-%05zu", std::string(quality_name(quality.mode)).c_str(),
                  static_cast<unsigned long long>(cfg.seed), i);
    s.id = tf.id + id;
    s.text = generate_text(tf, cfg, i);
    s.source_id = tf.id;
    s.status = SampleStatus::kChecked;
    const imaging::GrayImage page = render_line(tf, s.text, quality, cfg, line_seed);
    s.image = imaging::normalize_line(page, {0, page.height(), 0, page.width()}, cfg.line_height);
    if (quality.mode == Quality::kLow) {
      Rng noise(derive_seed(line_seed, 0x5EC));
      auto& px = s.image.pixels;
      for (Eigen::Index k = 0; k < px.size(); ++k) {
        float& v = px.data()[k];
        v = v >= 0.5f ? 1.0f : 0.0f;
        if (noise.bernoulli(quality.speckle)) v = 1.0f;
      }
    } else {
      s.image.pixels = (s.image.pixels.array() * 255.0f).round() / 255.0f;
    }
    data.push_back(std::move(s));
  }
  return data;
}

imaging::GrayImage compose_page(const std::vector<imaging::GrayImage>& lines, int leading, int margin) {
  int width = 0, height = 2 * margin;
  for (const auto& l : lines) {
    width = std::max(width, l.width());
    height += l.height();
  }
  if (!lines.empty()) height += leading * static_cast<int>(lines.size() - 1);
  imaging::GrayImage page(width + 2 * margin, std::max(height, 1));
  int y = margin;
  for (const auto& l : lines) {
    // Right-aligned, as a right-to-left page would be set.
    const int x = margin + width - l.width();
    page.pixels.block(y, x, l.height(), l.width()) = l.pixels;
    y += l.height() + leading;
  }
  return page;
}

void write_corpus(const Dataset& data, const Typeface& tf, const QualityProfile& quality, const CorpusConfig& cfg,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& s : data) {
    imaging::write_png(imaging::to_page(s.image), dir / (s.id + ".png"));
    std::ofstream gt(dir / (s.id + ".gt.txt"), std::ios::binary | std::ios::trunc);
    gt << text::u32_to_utf8(s.text) << '\n';
    if (!gt) throw Error(Errc::kIoFailure, "cannot write ground truth for " + s.id);
  }
  nlohmann::json manifest;
  manifest["typeface_id"] = tf.id;
  manifest["quality"] = quality_name(quality.mode);
  manifest["seed"] = cfg.seed;
  manifest["lines"] = data.size();
  manifest["line_height"] = cfg.line_height;
  manifest["text_length"] = {cfg.text_length.first, cfg.text_length.second};
  manifest["mark_density"] = tf.mark_density;
  manifest["punctuation_density"] = tf.punctuation_density;
  manifest["kashida_px"] = {tf.kashida_px.first, tf.kashida_px.second};
  if (quality.mode == Quality::kLow) {
    manifest["downscale"] = quality.downscale;
    manifest["speckle"] = quality.speckle;
  }
  manifest["typeface"] = tf.to_json();
  std::ofstream out(dir / "corpus.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(Errc::kIoFailure, "cannot write corpus.json");
}

}  // namespace rtlocr::synth
