// SPDX-License-Identifier: Apache-2.0
//
// Model container and line-pair datasets on disk.
//
// Model file layout (all integers little-endian):
//
//   "KORM"  u32 version  u32 header_len  header (UTF-8 JSON)
//   tensor payloads, float32 row-major, in header index order
//   u64 checksum: first 8 bytes of SHA-256 over everything before it
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rtlocr/dataset.hpp"
#include "rtlocr/model.hpp"

namespace rtlocr::store {

inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> serialize_model(const OcrModel& model);
OcrModel deserialize_model(std::span<const std::uint8_t> bytes);

/// Returns the number of bytes written. The file appears atomically.
std::size_t save_model(const OcrModel& model, const std::filesystem::path& destination);
OcrModel load_model(const std::filesystem::path& source);

/// Writes `bytes` to `path` through a sibling temp file and a rename.
void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_atomic(const std::filesystem::path& path, std::string_view text);

struct LoadOptions {
  int line_height = imaging::kDefaultLineHeight;
  std::string source_id;  // defaults to the directory name
  std::function<void(const std::string&)> warn;
};

/// Pairs <id>.png with <id>.gt.txt, sorted by id. Orphans are reported
/// through `warn` and skipped.
Dataset load_dataset(const std::filesystem::path& directory, const LoadOptions& options = {});

/// Ground truth as stored: NFC, one trailing newline removed.
std::u32string read_ground_truth(const std::filesystem::path& path);

/// Prepares a stored line crop for the recognizer: inversion only when it is
/// already `line_height` tall, full normalization otherwise.
imaging::LineImage to_line_image(const imaging::GrayImage& page, int line_height);

}  // namespace rtlocr::store
