// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include <nlohmann/json.hpp>

#include "rtlocr/digest.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::store {

namespace {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

constexpr char kMagic[4] = {'K', 'O', 'R', 'M'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::uint64_t checksum(std::span<const std::uint8_t> bytes) {
  const Sha256 d = sha256(bytes);
  std::uint64_t v;
  std::memcpy(&v, d.data(), sizeof(v));
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const OcrModel& model) {
  const auto& net = model.network;
  nlohmann::json header;
  header["line_height"] = model.line_height;
  header["hidden"] = net.hidden();
  header["classes"] = net.classes();
  std::vector<std::uint32_t> cps(model.codec.chars().begin(), model.codec.chars().end());
  header["codec"] = cps;
  header["metadata"] = {{"seed", model.metadata.seed},
                        {"updates", model.metadata.updates},
                        {"source_ids", model.metadata.source_ids}};
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  net.params().for_each([&](const char* name, const net::Mat<float>& m) {
    index.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(float);
  });
  header["tensors"] = index;
  const std::string h = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(12 + h.size() + offset + 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
  out.insert(out.end(), h.begin(), h.end());
  net.params().for_each([&](const char*, const net::Mat<float>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put<float>(out, m(r, c));
    }
  });
  put<std::uint64_t>(out, checksum(out));
  return out;
}

OcrModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw Error(Errc::kBadMagic, "not a model file");
  }
  if (bytes.size() < 8) throw Error(Errc::kChecksumMismatch, "file truncated");
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kModelVersion) {
    throw Error(Errc::kUnsupportedVersion, "model version " + std::to_string(version) + " (expected " +
                                               std::to_string(kModelVersion) + ")");
  }
  if (bytes.size() < 20) throw Error(Errc::kChecksumMismatch, "file truncated");
  const auto body = bytes.first(bytes.size() - 8);
  if (checksum(body) != get<std::uint64_t>(bytes, bytes.size() - 8)) {
    throw Error(Errc::kChecksumMismatch, "model checksum does not match contents");
  }
  const auto header_len = get<std::uint32_t>(bytes, 8);
  if (12 + static_cast<size_t>(header_len) > body.size()) throw Error(Errc::kShapeMismatch, "header overruns file");

  OcrModel model;
  size_t payload = 0;
  try {
    const auto header = nlohmann::json::parse(body.begin() + 12, body.begin() + 12 + header_len);
    model.line_height = header.at("line_height").get<int>();
    const int hidden = header.at("hidden").get<int>();
    const int classes = header.at("classes").get<int>();
    std::u32string chars;
    for (const auto& c : header.at("codec")) chars.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
    model.codec = script::Codec(chars);
    if (model.codec.num_classes() != classes || model.line_height <= 0 || hidden <= 0) {
      throw Error(Errc::kShapeMismatch, "header dimensions are inconsistent");
    }
    const auto& meta = header.at("metadata");
    model.metadata.seed = meta.at("seed").get<std::uint64_t>();
    model.metadata.updates = meta.at("updates").get<std::uint64_t>();
    model.metadata.source_ids = meta.at("source_ids").get<std::vector<std::string>>();
    model.network = net::Network<float>(model.line_height, hidden, classes);

    const auto& index = header.at("tensors");
    const size_t data_start = 12 + header_len;
    size_t slot = 0;
    model.network.params().for_each([&](const char* name, net::Mat<float>& m) {
      if (slot >= index.size()) throw Error(Errc::kShapeMismatch, "missing tensor " + std::string(name));
      const auto& entry = index[slot++];
      if (entry.at("name").get<std::string>() != name || entry.at("shape").at(0).get<Eigen::Index>() != m.rows() ||
          entry.at("shape").at(1).get<Eigen::Index>() != m.cols()) {
        throw Error(Errc::kShapeMismatch, "tensor " + std::string(name) + " does not match the declared sizes");
      }
      const size_t offset = data_start + entry.at("offset").get<size_t>();
      const size_t n = static_cast<size_t>(m.size());
      if (offset + n * sizeof(float) > body.size()) throw Error(Errc::kShapeMismatch, "tensor data overruns file");
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          m(r, c) = get<float>(bytes, offset + (static_cast<size_t>(r * m.cols() + c)) * sizeof(float));
        }
      }
      payload += n * sizeof(float);
    });
    if (slot != index.size()) throw Error(Errc::kShapeMismatch, "unexpected extra tensors");
    if (data_start + payload != body.size()) throw Error(Errc::kShapeMismatch, "trailing bytes after tensors");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kShapeMismatch, std::string("bad model header: ") + e.what());
  }
  return model;
}

void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::kIoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::kIoFailure, "cannot move file into place at " + path.string());
  }
}

void write_atomic(const std::filesystem::path& path, std::string_view text) {
  write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::size_t save_model(const OcrModel& model, const std::filesystem::path& destination) {
  const auto bytes = serialize_model(model);
  write_atomic(destination, bytes);
  return bytes.size();
}

OcrModel load_model(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot read " + source.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

std::u32string read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot read " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return text::nfc(text::utf8_to_u32(s));
}

imaging::LineImage to_line_image(const imaging::GrayImage& page, int line_height) {
  if (page.height() == line_height) return imaging::from_page(page);
  return imaging::normalize_line(page, {0, page.height(), 0, page.width()}, line_height);
}

Dataset load_dataset(const std::filesystem::path& directory, const LoadOptions& options) {
  if (!std::filesystem::is_directory(directory)) {
    throw Error(Errc::kIoFailure, directory.string() + " is not a directory");
  }
  constexpr std::string_view kGt = ".gt.txt";
  std::map<std::string, std::pair<bool, bool>> stems;  // id -> (has image, has text)
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > kGt.size() && name.ends_with(kGt)) {
      stems[name.substr(0, name.size() - kGt.size())].second = true;
    } else if (entry.path().extension() == ".png") {
      stems[entry.path().stem().string()].first = true;
    }
  }
  const std::string source = options.source_id.empty() ? directory.filename().string() : options.source_id;
  Dataset out;
  for (const auto& [id, have] : stems) {
    if (!have.first || !have.second) {
      if (options.warn) {
        options.warn("OrphanFile: " + id + (have.first ? ".png has no .gt.txt" : ".gt.txt has no .png"));
      }
      continue;
    }
    LineSample s;
    s.id = id;
    s.text = read_ground_truth(directory / (id + std::string(kGt)));
    s.image = to_line_image(imaging::load_image_file(directory / (id + ".png")), options.line_height);
    s.source_id = source;
    s.status = SampleStatus::kChecked;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(Errc::kEmptyDataset, "no line pairs in " + directory.string());
  return out;
}

}  // namespace rtlocr::store
