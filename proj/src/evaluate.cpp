// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "rtlocr/parallel.hpp"
#include "rtlocr/text.hpp"

namespace rtlocr::evaluate {

namespace {

// Full (|a|+1) x (|b|+1) table; rows index gt, columns hyp.
std::vector<int> distance_table(std::u32string_view a, std::u32string_view b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](size_t i, size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int sub = at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  return d;
}

std::optional<double> accuracy_of(long distance, long chars, bool any_lines) {
  if (!any_lines) return std::nullopt;
  const double acc = 100.0 * (1.0 - static_cast<double>(distance) / static_cast<double>(std::max(chars, 1L)));
  return std::max(0.0, acc);
}

std::string fmt_percent(const std::optional<double>& v) {
  if (!v) return "na";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

}  // namespace

int levenshtein(std::u32string_view a, std::u32string_view b) {
  // Two-row version of the same recurrence.
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1), prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<EditOp> align(std::u32string_view gt, std::u32string_view hyp) {
  const auto d = distance_table(gt, hyp);
  const size_t m = hyp.size();
  auto at = [&](size_t i, size_t j) { return d[i * (m + 1) + j]; };
  std::vector<EditOp> ops;
  size_t i = gt.size(), j = hyp.size();
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = gt[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        ops.push_back({same ? EditKind::kMatch : EditKind::kSubstitute, gt[i - 1], hyp[j - 1]});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back({EditKind::kDelete, gt[i - 1], 0});
      --i;
    } else {
      ops.push_back({EditKind::kInsert, 0, hyp[j - 1]});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

CharAccuracy char_accuracy(std::u32string_view gt, std::u32string_view hyp) {
  const std::u32string g = text::nfc(gt);
  const std::u32string h = text::nfc(hyp);
  CharAccuracy r;
  r.distance = levenshtein(g, h);
  const double denom = static_cast<double>(std::max<size_t>(g.size(), 1));
  r.accuracy = std::max(0.0, 100.0 * (1.0 - r.distance / denom));
  return r;
}

EvalReport evaluate_pairs(std::vector<LineRecord> lines, const script::ScriptFilter& filter,
                          std::size_t top_confusions) {
  EvalReport report;
  std::map<std::pair<std::u32string, std::u32string>, int> confusion_counts;
  for (LineRecord& line : lines) {
    line.gt = text::nfc(line.gt);
    line.hyp = text::nfc(line.hyp);
    line.distance = levenshtein(line.gt, line.hyp);
    const std::u32string gs = script::script_only(line.gt, filter);
    const std::u32string hs = script::script_only(line.hyp, filter);
    line.script_distance = levenshtein(gs, hs);
    report.total_distance += line.distance;
    report.total_script_distance += line.script_distance;
    report.gt_chars += static_cast<long>(line.gt.size());
    report.gt_script_chars += static_cast<long>(gs.size());
    for (const EditOp& op : align(line.gt, line.hyp)) {
      if (op.kind == EditKind::kMatch) continue;
      std::u32string g = op.gt ? std::u32string(1, op.gt) : std::u32string();
      std::u32string h = op.hyp ? std::u32string(1, op.hyp) : std::u32string();
      ++confusion_counts[{std::move(g), std::move(h)}];
    }
  }
  const bool any = !lines.empty();
  report.full_accuracy = accuracy_of(report.total_distance, report.gt_chars, any);
  report.script_accuracy = accuracy_of(report.total_script_distance, report.gt_script_chars, any);
  for (const auto& [key, count] : confusion_counts) report.confusions.push_back({key.first, key.second, count});
  std::stable_sort(report.confusions.begin(), report.confusions.end(),
                   [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
  if (report.confusions.size() > top_confusions) report.confusions.resize(top_confusions);
  report.lines = std::move(lines);
  return report;
}

EvalReport evaluate(const OcrModel& model, const Dataset& data, const script::ScriptFilter& filter, int jobs,
                    std::size_t top_confusions) {
  std::vector<LineRecord> lines(data.size());
  parallel_for(data.size(), jobs, [&](std::size_t i) {
    const auto rec = model.recognize(data[i].image);
    lines[i].id = data[i].id;
    lines[i].gt = data[i].text;
    lines[i].hyp = rec.text;
    lines[i].confidence = rec.mean_confidence();
  });
  return evaluate_pairs(std::move(lines), filter, top_confusions);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["full_accuracy"] = full_accuracy ? nlohmann::json(*full_accuracy) : nlohmann::json(nullptr);
  j["script_accuracy"] = script_accuracy ? nlohmann::json(*script_accuracy) : nlohmann::json(nullptr);
  j["total_distance"] = total_distance;
  j["total_script_distance"] = total_script_distance;
  j["gt_chars"] = gt_chars;
  j["gt_script_chars"] = gt_script_chars;
  j["lines"] = nlohmann::json::array();
  for (const auto& l : lines) {
    j["lines"].push_back({{"id", l.id},
                          {"gt", text::u32_to_utf8(l.gt)},
                          {"hyp", text::u32_to_utf8(l.hyp)},
                          {"distance", l.distance},
                          {"script_distance", l.script_distance},
                          {"confidence", l.confidence}});
  }
  j["confusions"] = nlohmann::json::array();
  for (const auto& c : confusions) {
    j["confusions"].push_back({{"gt", text::u32_to_utf8(c.gt)}, {"hyp", text::u32_to_utf8(c.hyp)}, {"count", c.count}});
  }
  return j;
}

std::string format_table(const std::vector<TableRow>& rows) {
  const std::vector<std::string> header = {"Model", "Work", "Quality", "Type", "Full", "Ar"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& r : rows) {
    cells.push_back({r.model, r.work, r.quality, r.role, fmt_percent(r.full), fmt_percent(r.script)});
  }
  std::vector<size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (size_t r = 0; r < cells.size(); ++r) {
    for (size_t c = 0; c < cells[r].size(); ++c) {
      const bool numeric = c >= 4;
      const std::string& s = cells[r][c];
      const std::string pad(width[c] - s.size(), ' ');
      out << (c ? "  " : "") << (numeric ? pad + s : s + (c + 1 < cells[r].size() ? pad : ""));
    }
    out << '\n';
    if (r == 0) {
      size_t total = 0;
      for (size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

std::string format_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "model,work,quality,type,full,ar\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.work << ',' << r.quality << ',' << r.role << ',' << fmt_percent(r.full) << ','
        << fmt_percent(r.script) << '\n';
  }
  return out.str();
}

}  // namespace rtlocr::evaluate
