// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/transcribe.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "rtlocr/digest.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/store.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::transcribe {

namespace {

constexpr std::string_view kRecordsOpen = R"(<script type="application/json" id="form-data">)";
constexpr std::string_view kScriptClose = "</script>";

// Used when no UI bundle is supplied: enough to fill the fields and save a
// manifest, nothing more.
constexpr std::string_view kFallbackScript = R"JS(
(function () {
  var data = JSON.parse(document.getElementById('form-data').textContent);
  var rows = document.querySelectorAll('.line');
  document.getElementById('export').addEventListener('click', function () {
    var lines = data.lines.map(function (rec, i) {
      var row = rows[i];
      return {
        id: rec.id,
        sha256: rec.sha256,
        text: row.querySelector('input.text').value.normalize('NFC'),
        status: row.querySelector('input.checked').checked ? 'checked' : 'draft',
        note: rec.note
      };
    });
    var blob = new Blob([JSON.stringify({form_id: data.form_id, lines: lines}, null, 2)],
                        {type: 'application/json'});
    var a = document.createElement('a');
    a.href = URL.createObjectURL(blob);
    a.download = data.form_id + '.manifest.json';
    a.click();
  });
})();
)JS";

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// JSON inside a <script> element must not contain "</".
std::string script_safe(std::string json) {
  std::string out;
  out.reserve(json.size());
  for (size_t i = 0; i < json.size(); ++i) {
    if (json[i] == '<' && i + 1 < json.size() && json[i + 1] == '/') {
      out += "<\\/";
      ++i;
    } else {
      out += json[i];
    }
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> read_prefill(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

std::string normalize_transcription(std::string_view text) {
  return text::u32_to_utf8(text::nfc(text::trim(text::utf8_to_u32(text))));
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["form_id"] = form_id;
  j["lines"] = nlohmann::json::array();
  for (const auto& l : lines) {
    j["lines"].push_back({{"id", l.id},
                          {"sha256", l.sha256},
                          {"text", l.text},
                          {"status", status_name(l.status)},
                          {"note", l.note}});
  }
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& why) { return Error(Errc::kMalformedManifest, why); };
  if (!j.is_object() || !j.contains("form_id") || !j["form_id"].is_string()) throw bad("missing form_id");
  if (!j.contains("lines") || !j["lines"].is_array()) throw bad("missing lines array");
  Manifest m;
  m.form_id = j["form_id"].get<std::string>();
  std::set<std::string> seen;
  for (const auto& lj : j["lines"]) {
    if (!lj.is_object()) throw bad("line entry is not an object");
    for (const char* key : {"id", "sha256", "text", "status"}) {
      if (!lj.contains(key) || !lj[key].is_string()) throw bad(std::string("line entry lacks string field '") + key + "'");
    }
    ManifestLine l;
    l.id = lj["id"].get<std::string>();
    l.sha256 = lj["sha256"].get<std::string>();
    l.text = lj["text"].get<std::string>();
    if (lj.contains("note") && !lj["note"].is_null()) {
      if (!lj["note"].is_string()) throw bad("note must be a string");
      l.note = lj["note"].get<std::string>();
    }
    if (l.id.empty() || l.id.find_first_of("/\\") != std::string::npos || l.id == "." || l.id == "..") {
      throw bad("line id '" + l.id + "' is not a plain file stem");
    }
    if (!seen.insert(l.id).second) throw bad("duplicate line id '" + l.id + "'");
    if (!is_hex_digest(l.sha256)) throw bad("line " + l.id + ": sha256 must be 64 lowercase hex chars");
    const std::string status = lj["status"].get<std::string>();
    if (status == "checked") {
      l.status = SampleStatus::kChecked;
    } else if (status == "draft") {
      l.status = SampleStatus::kDraft;
    } else {
      throw bad("line " + l.id + ": unknown status '" + status + "'");
    }
    m.lines.push_back(std::move(l));
  }
  return m;
}

Manifest Manifest::read(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kMalformedManifest, path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string render_form(const Manifest& skeleton, const std::vector<std::vector<std::uint8_t>>& pngs,
                        const std::string& title, const std::string& ui_bundle) {
  if (pngs.size() != skeleton.lines.size()) throw Error(Errc::kInvalidArgument, "one PNG per manifest line");
  nlohmann::json records;
  records["form_id"] = skeleton.form_id;
  records["lines"] = nlohmann::json::array();
  for (size_t i = 0; i < pngs.size(); ++i) {
    const auto& l = skeleton.lines[i];
    records["lines"].push_back({{"id", l.id},
                                {"sha256", l.sha256},
                                {"png", base64(pngs[i])},
                                {"text", l.text},
                                {"status", status_name(l.status)},
                                {"note", l.note}});
  }

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html lang=\"ar\">\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>" << html_escape(title) << "</title>\n"
       << "<style>\n"
       << "body{font-family:sans-serif;margin:2em;}\n"
       << ".line{margin-bottom:1.5em;}\n"
       << ".line img{display:block;max-width:100%;border:1px solid #ccc;}\n"
       << ".line input.text{width:100%;font-size:1.4em;direction:rtl;unicode-bidi:plaintext;}\n"
       << "</style>\n</head>\n<body>\n"
       << "<h1>" << html_escape(title) << "</h1>\n"
       << "<div id=\"app\" data-form-id=\"" << html_escape(skeleton.form_id) << "\">\n";
  for (size_t i = 0; i < pngs.size(); ++i) {
    const auto& l = skeleton.lines[i];
    html << "<div class=\"line\" data-id=\"" << html_escape(l.id) << "\">\n"
         << "<img alt=\"" << html_escape(l.id) << "\" src=\"data:image/png;base64,"
         << records["lines"][i]["png"].get<std::string>() << "\">\n"
         << "<input class=\"text\" type=\"text\" dir=\"rtl\" lang=\"ar\" value=\"" << html_escape(l.text) << "\">\n"
         << "<label><input class=\"checked\" type=\"checkbox\""
         << (l.status == SampleStatus::kChecked ? " checked" : "") << "> checked</label>\n"
         << "</div>\n";
  }
  html << "</div>\n<button id=\"export\" type=\"button\">Export manifest</button>\n"
       << kRecordsOpen << script_safe(records.dump()) << kScriptClose << "\n"
       << "<script>" << (ui_bundle.empty() ? std::string(kFallbackScript) : script_safe(ui_bundle)) << "</script>\n"
       << "</body>\n</html>\n";
  return html.str();
}

nlohmann::json embedded_records(const std::string& html) {
  const auto start = html.find(kRecordsOpen);
  if (start == std::string::npos) throw Error(Errc::kMalformedManifest, "form has no embedded records");
  const auto body = start + kRecordsOpen.size();
  const auto end = html.find(kScriptClose, body);
  if (end == std::string::npos) throw Error(Errc::kMalformedManifest, "unterminated record block");
  try {
    return nlohmann::json::parse(html.substr(body, end - body));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kMalformedManifest, std::string("embedded records: ") + e.what());
  }
}

FormResult make_form(const std::vector<std::filesystem::path>& pages, const std::filesystem::path& output,
                     const FormOptions& options) {
  FormResult result;
  result.form = output;
  auto stem = output;
  stem.replace_extension();
  result.manifest = stem;
  result.manifest += ".manifest.json";
  result.lines_dir = stem;
  result.lines_dir += "_lines";

  std::vector<imaging::GrayImage> crops;
  std::vector<std::string> ids;
  for (size_t p = 0; p < pages.size(); ++p) {
    const imaging::GrayImage page = imaging::load_image_file(pages[p]);
    const auto bin = imaging::binarize_otsu(page);
    const auto boxes = imaging::segment_lines(bin.image, options.segment);
    for (size_t i = 0; i < boxes.size(); ++i) {
      const auto& b = boxes[i];
      crops.emplace_back(Eigen::MatrixXf(page.pixels.block(b.top, b.left, b.height(), b.width())));
      char id[64];
      std::snprintf(id, sizeof(id), "p%03zu-l%03zu", p + 1, i + 1);
      ids.emplace_back(id);
    }
  }
  if (crops.empty()) throw Error(Errc::kNoLinesFound, "no text lines found in the given pages");

  std::vector<std::string> prefill;
  if (options.prefill) {
    prefill = read_prefill(*options.prefill);
    if (prefill.size() != crops.size() && options.warn) {
      options.warn("PrefillMismatch: " + std::to_string(prefill.size()) + " prefill lines for " +
                   std::to_string(crops.size()) + " segmented lines");
    }
  }

  std::filesystem::create_directories(result.lines_dir);
  std::vector<std::vector<std::uint8_t>> pngs;
  std::string digest_chain;
  for (size_t i = 0; i < crops.size(); ++i) {
    pngs.push_back(imaging::encode_png(crops[i]));
    store::write_atomic(result.lines_dir / (ids[i] + ".png"), pngs.back());
    ManifestLine line;
    line.id = ids[i];
    line.sha256 = to_hex(sha256(pngs.back()));
    if (i < prefill.size()) line.text = normalize_transcription(prefill[i]);
    line.status = SampleStatus::kDraft;
    digest_chain += line.sha256;
    result.skeleton.lines.push_back(std::move(line));
  }
  const auto chain = sha256(std::span(reinterpret_cast<const std::uint8_t*>(digest_chain.data()), digest_chain.size()));
  result.skeleton.form_id = "form-" + to_hex(std::span(chain).first(8));

  const std::string bundle = options.ui_bundle ? read_text(*options.ui_bundle) : std::string();
  store::write_atomic(result.form, render_form(result.skeleton, pngs, options.title, bundle));
  store::write_atomic(result.manifest, result.skeleton.to_json().dump(2) + "\n");
  return result;
}

nlohmann::json ImportReport::to_json() const {
  return {{"imported", imported},
          {"skipped_draft", skipped_draft},
          {"skipped_empty", skipped_empty},
          {"digest_mismatch", digest_mismatch},
          {"missing_image", missing_image}};
}

ImportReport import_transcription(const std::filesystem::path& manifest_path, const std::filesystem::path& lines_dir,
                                  const std::filesystem::path& output_dir, const ImportOptions& options) {
  const Manifest manifest = Manifest::read(manifest_path);
  std::filesystem::create_directories(output_dir);
  ImportReport report;
  for (const auto& line : manifest.lines) {
    if (line.status == SampleStatus::kDraft && !options.allow_draft) {
      report.skipped_draft.push_back(line.id);
      continue;
    }
    const std::string text = normalize_transcription(line.text);
    if (text.empty()) {
      report.skipped_empty.push_back(line.id);
      continue;
    }
    const auto image_path = lines_dir / (line.id + ".png");
    if (!std::filesystem::is_regular_file(image_path)) {
      report.missing_image.push_back(line.id);
      if (options.warn) options.warn("missing line image " + image_path.string());
      continue;
    }
    const std::string png = read_text(image_path);
    const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(png.data()), png.size());
    if (to_hex(sha256(bytes)) != line.sha256) {
      report.digest_mismatch.push_back(line.id);
      if (options.warn) options.warn("DigestMismatch: " + line.id + " changed since the form was made");
      continue;
    }
    store::write_atomic(output_dir / (line.id + ".png"), bytes);
    store::write_atomic(output_dir / (line.id + ".gt.txt"), text + "\n");
    report.imported.push_back(line.id);
  }
  return report;
}

}  // namespace rtlocr::transcribe
