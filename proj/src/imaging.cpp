// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rtlocr/error.hpp"

namespace rtlocr::imaging {

namespace {

int histogram_bin(float v) {
  return std::clamp(static_cast<int>(std::lround(v * 255.0f)), 0, 255);
}

}  // namespace

BinarizeResult binarize_otsu(const GrayImage& img) {
  if (img.width() <= 0 || img.height() <= 0) {
    throw Error(Errc::kInvalidArgument, "binarize_otsu: empty image");
  }
  const float first = img.pixels(0, 0);
  if ((img.pixels.array() == first).all()) {
    return {img, first, true};
  }

  std::array<double, 256> hist{};
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) hist[histogram_bin(img.pixels.data()[i])] += 1.0;
  const double total = static_cast<double>(img.pixels.size());
  double total_sum = 0.0;
  for (int i = 0; i < 256; ++i) total_sum += i * hist[i];

  // Class 0 = bins <= t (ink), class 1 = bins > t.
  int best_t = 0;
  double best_var = -1.0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    double var = 0.0;
    if (w0 > 0.0 && w1 > 0.0) {
      const double mu0 = sum0 / w0;
      const double mu1 = (total_sum - sum0) / w1;
      var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }

  GrayImage out(img.width(), img.height());
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
    out.pixels.data()[i] = histogram_bin(img.pixels.data()[i]) <= best_t ? 0.0f : 1.0f;
  }
  return {std::move(out), static_cast<float>(best_t) / 255.0f, false};
}

std::vector<LineBox> segment_lines(const GrayImage& bilevel, const SegmentConfig& cfg) {
  const int h = bilevel.height();
  const int w = bilevel.width();
  std::vector<int> ink(static_cast<size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) ink[y] += bilevel.at(x, y) < 0.5f ? 1 : 0;
  }

  struct Band {
    int top, bottom;
  };
  std::vector<Band> bands;
  for (int y = 0; y < h;) {
    if (ink[y] == 0) {
      ++y;
      continue;
    }
    int end = y;
    while (end < h && ink[end] > 0) ++end;
    if (!bands.empty() && y - bands.back().bottom < cfg.smoothing_radius) {
      bands.back().bottom = end;
    } else {
      bands.push_back({y, end});
    }
    y = end;
  }

  std::vector<Band> lines;
  std::vector<Band> fragments;
  for (const Band& b : bands) {
    (b.bottom - b.top >= cfg.min_line_height ? lines : fragments).push_back(b);
  }
  for (const Band& f : fragments) {
    Band* nearest = nullptr;
    int best_gap = cfg.min_line_height + 1;
    for (Band& l : lines) {
      const int gap = f.bottom <= l.top ? l.top - f.bottom : f.top - l.bottom;
      if (gap < best_gap) {
        best_gap = gap;
        nearest = &l;
      }
    }
    if (nearest != nullptr) {
      nearest->top = std::min(nearest->top, f.top);
      nearest->bottom = std::max(nearest->bottom, f.bottom);
    }
  }
  // Attaching fragments can make neighbouring lines touch; fold those together.
  std::vector<Band> merged;
  for (const Band& l : lines) {
    if (!merged.empty() && l.top < merged.back().bottom) {
      merged.back().bottom = std::max(merged.back().bottom, l.bottom);
    } else {
      merged.push_back(l);
    }
  }

  std::vector<LineBox> boxes;
  boxes.reserve(merged.size());
  for (const Band& l : merged) {
    int left = w, right = 0;
    for (int y = l.top; y < l.bottom; ++y) {
      for (int x = 0; x < w; ++x) {
        if (bilevel.at(x, y) < 0.5f) {
          left = std::min(left, x);
          right = std::max(right, x + 1);
        }
      }
    }
    boxes.push_back({l.top, l.bottom, left, right});
  }
  return boxes;
}

Eigen::MatrixXf resize_bilinear(const Eigen::MatrixXf& src, int out_rows, int out_cols) {
  const int in_rows = static_cast<int>(src.rows());
  const int in_cols = static_cast<int>(src.cols());
  Eigen::MatrixXf out(out_rows, out_cols);
  const double sy = static_cast<double>(in_rows) / out_rows;
  const double sx = static_cast<double>(in_cols) / out_cols;
  for (int c = 0; c < out_cols; ++c) {
    const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(in_cols - 1));
    const int x0 = static_cast<int>(fx);
    const int x1 = std::min(x0 + 1, in_cols - 1);
    const float ax = static_cast<float>(fx - x0);
    for (int r = 0; r < out_rows; ++r) {
      const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(in_rows - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, in_rows - 1);
      const float ay = static_cast<float>(fy - y0);
      const float top = src(y0, x0) * (1 - ax) + src(y0, x1) * ax;
      const float bot = src(y1, x0) * (1 - ax) + src(y1, x1) * ax;
      out(r, c) = top * (1 - ay) + bot * ay;
    }
  }
  return out;
}

LineImage normalize_line(const GrayImage& img, const LineBox& box, int height, int margin) {
  if (box.top < 0 || box.left < 0 || box.bottom > img.height() || box.right > img.width() ||
      box.top >= box.bottom || box.left >= box.right) {
    throw Error(Errc::kInvalidArgument, "normalize_line: box outside image");
  }
  if (height <= 0 || margin < 0) throw Error(Errc::kInvalidArgument, "normalize_line: bad height/margin");

  int top = box.bottom, bottom = box.top, left = box.right, right = box.left;
  for (int y = box.top; y < box.bottom; ++y) {
    for (int x = box.left; x < box.right; ++x) {
      if (img.at(x, y) < 0.5f) {
        top = std::min(top, y);
        bottom = std::max(bottom, y + 1);
        left = std::min(left, x);
        right = std::max(right, x + 1);
      }
    }
  }
  if (top >= bottom) throw Error(Errc::kEmptyLine, "no ink inside line box");

  // Crop with white padding where the margin runs past the page.
  const int crop_h = bottom - top + 2 * margin;
  const int crop_w = right - left + 2 * margin;
  Eigen::MatrixXf crop = Eigen::MatrixXf::Zero(crop_h, crop_w);
  for (int y = 0; y < crop_h; ++y) {
    const int sy = top - margin + y;
    for (int x = 0; x < crop_w; ++x) {
      const int sx = left - margin + x;
      const bool inside = sy >= box.top && sy < box.bottom && sx >= box.left && sx < box.right;
      crop(y, x) = inside ? 1.0f - img.at(sx, sy) : 0.0f;
    }
  }

  const double scale = static_cast<double>(height) / crop_h;
  const int out_w = std::max(1, static_cast<int>(std::lround(crop_w * scale)));
  LineImage line;
  if (crop_h == height && crop_w == out_w) {
    line.pixels = std::move(crop);
  } else {
    line.pixels = resize_bilinear(crop, height, out_w);
  }
  line.pixels = line.pixels.cwiseMax(0.0f).cwiseMin(1.0f);
  return line;
}

}  // namespace rtlocr::imaging
