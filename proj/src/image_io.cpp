// SPDX-License-Identifier: Apache-2.0
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "rtlocr/error.hpp"
#include "rtlocr/imaging.hpp"

namespace rtlocr::imaging {

namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), b.begin());
}

bool is_pgm(std::span<const std::uint8_t> b) {
  return b.size() >= 2 && b[0] == 'P' && b[1] == '5';
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(Errc::kCorruptImage, "png header: " + msg);
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = colour ? 3 : 1;
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (w <= 0 || h <= 0) {
    png_image_free(&image);
    throw Error(Errc::kCorruptImage, "png has zero extent");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&image, &white, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(Errc::kCorruptImage, "png data: " + msg);
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = &buf[(static_cast<size_t>(y) * w + x) * channels];
      float sum = 0.0f;
      for (int c = 0; c < channels; ++c) sum += p[c];
      out.at(x, y) = sum / (255.0f * channels);
    }
  }
  return out;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
bool pgm_token(std::span<const std::uint8_t> b, size_t& pos, std::string& tok) {
  tok.clear();
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  return !tok.empty();
}

GrayImage decode_pgm(std::span<const std::uint8_t> b) {
  size_t pos = 2;
  std::string tok;
  int fields[3];
  for (int& f : fields) {
    if (!pgm_token(b, pos, tok)) throw Error(Errc::kCorruptImage, "truncated pgm header");
    try {
      f = std::stoi(tok);
    } catch (const std::exception&) {
      throw Error(Errc::kCorruptImage, "bad pgm header field '" + tok + "'");
    }
  }
  const int w = fields[0], h = fields[1], maxval = fields[2];
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(Errc::kCorruptImage, "invalid pgm dimensions or maxval");
  }
  ++pos;  // single whitespace byte after maxval
  const size_t bpp = maxval < 256 ? 1 : 2;
  const size_t need = static_cast<size_t>(w) * h * bpp;
  if (pos > b.size() || b.size() - pos < need) throw Error(Errc::kCorruptImage, "truncated pgm data");
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = pos + (static_cast<size_t>(y) * w + x) * bpp;
      const unsigned v = bpp == 1 ? b[i] : (static_cast<unsigned>(b[i]) << 8) | b[i + 1];
      out.at(x, y) = std::min(1.0f, static_cast<float>(v) / static_cast<float>(maxval));
    }
  }
  return out;
}

}  // namespace

GrayImage::GrayImage(int width, int height, float fill)
    : pixels(Eigen::MatrixXf::Constant(height, width, fill)) {}

GrayImage load_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pgm(bytes)) return decode_pgm(bytes);
  throw Error(Errc::kUnsupportedFormat, "expected PNG or binary PGM (P5)");
}

GrayImage load_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_image(bytes);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  std::vector<std::uint8_t> raw(static_cast<size_t>(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const float v = std::clamp(img.at(x, y), 0.0f, 1.0f);
      raw[static_cast<size_t>(y) * img.width() + x] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw Error(Errc::kIoFailure, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw Error(Errc::kIoFailure, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

GrayImage to_page(const LineImage& line) {
  return GrayImage(Eigen::MatrixXf((1.0f - line.pixels.array()).matrix()));
}

LineImage from_page(const GrayImage& img) {
  return LineImage{(1.0f - img.pixels.array()).matrix()};
}

}  // namespace rtlocr::imaging
