// SPDX-License-Identifier: Apache-2.0
//
// Transcription forms for building gold-standard line data by hand.
//
// make_form segments page images into lines and writes three things:
//   <form>.html           self-contained form, line PNGs inlined as base64
//   <form>.manifest.json  manifest skeleton {form_id, lines:[{id, sha256, text, status, note}]}
//   <form>_lines/<id>.png the exact line crops the digests refer to
//
// The form embeds its records as JSON in
//   <script type="application/json" id="form-data">
//   {"form_id", "lines": [{"id", "sha256", "png", "text", "status", "note"}]}
// and exports a manifest with the schema above. import_transcription turns
// a manifest plus the line crops into an <id>.png / <id>.gt.txt dataset.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlocr/dataset.hpp"
#include "rtlocr/imaging.hpp"

namespace rtlocr::transcribe {

struct ManifestLine {
  std::string id;
  std::string sha256;  // 64 lowercase hex chars
  std::string text;    // UTF-8, logical order
  SampleStatus status = SampleStatus::kDraft;
  std::string note;

  friend bool operator==(const ManifestLine&, const ManifestLine&) = default;
};

struct Manifest {
  std::string form_id;
  std::vector<ManifestLine> lines;

  nlohmann::json to_json() const;
  /// Throws MalformedManifest on schema violations (missing fields, bad
  /// digests, unknown status, duplicate ids).
  static Manifest from_json(const nlohmann::json& j);
  static Manifest read(const std::filesystem::path& path);

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

using Warn = std::function<void(const std::string&)>;

struct FormOptions {
  std::optional<std::filesystem::path> prefill;    // one line of text per segmented line
  std::optional<std::filesystem::path> ui_bundle;  // JavaScript inlined into the form
  imaging::SegmentConfig segment;
  std::string title = "Line transcription";
  Warn warn;
};

struct FormResult {
  std::filesystem::path form;
  std::filesystem::path manifest;
  std::filesystem::path lines_dir;
  Manifest skeleton;
};

/// `output` is the form path; siblings are derived from it. Throws
/// NoLinesFound when no page yields a line.
FormResult make_form(const std::vector<std::filesystem::path>& pages, const std::filesystem::path& output,
                     const FormOptions& options = {});

/// The HTML document for already-cropped lines (PNG bytes per line).
std::string render_form(const Manifest& skeleton, const std::vector<std::vector<std::uint8_t>>& pngs,
                        const std::string& title, const std::string& ui_bundle);

/// Pulls the embedded record block back out of a form document.
nlohmann::json embedded_records(const std::string& html);

struct ImportOptions {
  bool allow_draft = false;
  Warn warn;
};

struct ImportReport {
  std::vector<std::string> imported;
  std::vector<std::string> skipped_draft;
  std::vector<std::string> skipped_empty;
  std::vector<std::string> digest_mismatch;
  std::vector<std::string> missing_image;

  nlohmann::json to_json() const;
};

ImportReport import_transcription(const std::filesystem::path& manifest, const std::filesystem::path& lines_dir,
                                  const std::filesystem::path& output_dir, const ImportOptions& options = {});

/// Text as stored in a dataset: NFC with surrounding whitespace removed.
std::string normalize_transcription(std::string_view text);

}  // namespace rtlocr::transcribe
