// SPDX-License-Identifier: Apache-2.0
//
// Page images, binarization, line segmentation and line normalization.
//
// Two pixel conventions live here. Page images (GrayImage) use the usual
// 0 = black ink, 1 = white paper. Normalized lines (LineImage) are
// ink-positive: 1 = ink, so the recognizer sees sparse positive inputs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rtlocr::imaging {

/// Intensities indexed (row, col) = (y, x), values in [0,1].
struct GrayImage {
  Eigen::MatrixXf pixels;

  GrayImage() = default;
  GrayImage(int width, int height, float fill = 1.0f);
  explicit GrayImage(Eigen::MatrixXf p) : pixels(std::move(p)) {}

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
  float at(int x, int y) const { return pixels(y, x); }
  float& at(int x, int y) { return pixels(y, x); }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels.rows() == b.pixels.rows() && a.pixels.cols() == b.pixels.cols() &&
           a.pixels == b.pixels;
  }
};

/// Half-open pixel rectangle within a page: rows [top, bottom), cols [left, right).
struct LineBox {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;

  int height() const { return bottom - top; }
  int width() const { return right - left; }
  friend bool operator==(const LineBox&, const LineBox&) = default;
};

/// A height-normalized, ink-positive text line. Column t of `pixels` is the
/// recognizer's input frame t.
struct LineImage {
  Eigen::MatrixXf pixels;  // height x width

  int height() const { return static_cast<int>(pixels.rows()); }
  int width() const { return static_cast<int>(pixels.cols()); }

  friend bool operator==(const LineImage& a, const LineImage& b) {
    return a.pixels.rows() == b.pixels.rows() && a.pixels.cols() == b.pixels.cols() &&
           a.pixels == b.pixels;
  }
};

inline constexpr int kDefaultLineHeight = 48;

// ---- codecs -----------------------------------------------------------------

/// Decodes PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or binary PGM (P5).
/// Colour is reduced to the plain average of the channels.
GrayImage load_image(std::span<const std::uint8_t> bytes);
GrayImage load_image_file(const std::filesystem::path& path);

/// 8-bit grayscale PNG. Deterministic for identical input.
std::vector<std::uint8_t> encode_png(const GrayImage& img);
void write_png(const GrayImage& img, const std::filesystem::path& path);

/// Page-convention view of a line (1 - ink) and back.
GrayImage to_page(const LineImage& line);
LineImage from_page(const GrayImage& img);

// ---- processing ---------------------------------------------------------------

struct BinarizeResult {
  GrayImage image;
  float threshold = 0.0f;   // pixels <= threshold became ink (0.0)
  bool degenerate = false;  // all pixels identical; image returned unchanged
};

/// Otsu over a 256-bin histogram; the lowest threshold wins ties.
BinarizeResult binarize_otsu(const GrayImage& img);

struct SegmentConfig {
  int min_line_height = 8;
  int smoothing_radius = 2;
};

/// Projection-profile segmentation of a bilevel page. Ink bands separated by
/// fewer than `smoothing_radius` blank rows are merged. Bands shorter than
/// `min_line_height` are attached to a neighbouring line when one lies within
/// `min_line_height` rows (dots and vowel marks), otherwise dropped.
std::vector<LineBox> segment_lines(const GrayImage& bilevel, const SegmentConfig& cfg = {});

/// Tight vertical crop of the ink inside `box` plus `margin` white pixels on
/// every side, then a bilinear rescale to `height` rows with the same factor
/// applied to the width. Pixels below 0.5 count as ink.
LineImage normalize_line(const GrayImage& img, const LineBox& box,
                         int height = kDefaultLineHeight, int margin = 2);

/// Bilinear resampling with pixel-centre alignment.
Eigen::MatrixXf resize_bilinear(const Eigen::MatrixXf& src, int out_rows, int out_cols);

}  // namespace rtlocr::imaging
