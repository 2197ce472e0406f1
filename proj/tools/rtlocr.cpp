// SPDX-License-Identifier: Apache-2.0
//
// rtlocr: command-line front end.
//
//   rtlocr synth --lines 800 --seed 1 --typeface base --quality high -o ds/
//   rtlocr train -d ds/ -o run/
//   rtlocr eval -m run/best.korm -d ds-test/
//   rtlocr ocr -m run/best.korm page.png
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 internal error.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtlocr/error.hpp"
#include "rtlocr/evaluate.hpp"
#include "rtlocr/imaging.hpp"
#include "rtlocr/parallel.hpp"
#include "rtlocr/run_config.hpp"
#include "rtlocr/store.hpp"
#include "rtlocr/synth.hpp"
#include "rtlocr/text.hpp"
#include "rtlocr/train.hpp"
#include "rtlocr/transcribe.hpp"

namespace fs = std::filesystem;
using namespace rtlocr;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::string long_name(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  return names.empty() ? std::string() : names.front();
}

/// Long option names a config file may set for this subcommand.
std::set<std::string> config_keys(const CLI::App* sub) {
  std::set<std::string> keys;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = long_name(opt);
    if (!name.empty() && name != "help" && name != "config") keys.insert(name);
  }
  return keys;
}

/// Appends `--key=value` for config entries the command line did not set, so
/// flags always override file values.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
  std::optional<std::string> config_path;
  std::string command;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (command.empty() && !args[i].empty() && args[i][0] != '-') {
      for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        if (sub->get_name() == args[i]) command = args[i];
      }
    }
  }
  if (!config_path || command.empty()) return args;
  const CLI::App* sub = const_cast<CLI::App&>(app).get_subcommand(command);
  RunConfig cfg(config_keys(sub));
  cfg.load(*config_path);
  std::map<std::string, std::vector<std::string>> spellings;
  for (const CLI::Option* opt : sub->get_options()) {
    auto& forms = spellings[long_name(opt)];
    for (const auto& l : opt->get_lnames()) forms.push_back("--" + l);
    for (const auto& s : opt->get_snames()) forms.push_back("-" + s);
  }
  for (const auto& [key, value] : cfg.values()) {
    bool given = false;
    for (const auto& a : args) {
      for (const auto& form : spellings[key]) {
        if (a == form || a.rfind(form + "=", 0) == 0 || (form.size() == 2 && a.rfind(form, 0) == 0)) given = true;
      }
    }
    if (!given) args.push_back("--" + key + "=" + value);
  }
  return args;
}

/// The options in effect for a subcommand, in config file syntax.
std::string effective_config(const CLI::App* sub) {
  RunConfig cfg(config_keys(sub));
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = long_name(opt);
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
      if (opt->get_type_size() == 0 && results.size() == 1 && results[0] == "1") value = "true";
    } else {
      value = opt->get_default_str();
      if (value.empty()) continue;
    }
    cfg.set(name, value);
  }
  return cfg.to_string();
}

void echo_config(const CLI::App* sub, const fs::path& dir) {
  fs::create_directories(dir);
  store::write_atomic(dir / "config.txt", "# rtlocr " + sub->get_name() + "\n" + effective_config(sub));
}

synth::Typeface resolve_typeface(const std::string& spec) {
  const synth::Typeface base = synth::Typeface::base();
  if (spec == "base") return base;
  if (spec.rfind("derived:", 0) == 0) {
    try {
      return synth::derive_typeface(base, std::stoull(spec.substr(8)));
    } catch (const std::logic_error&) {
      throw Error(Errc::kInvalidConfig, "bad derived typeface seed in '" + spec + "'");
    }
  }
  std::ifstream in(spec);
  if (!in) throw Error(Errc::kInvalidConfig, "typeface must be 'base', 'derived:<seed>' or a JSON file");
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    // A corpus.json manifest carries its typeface under "typeface".
    return synth::Typeface::from_json(j.contains("typeface") ? j["typeface"] : j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidConfig, spec + ": " + e.what());
  }
}

std::vector<imaging::LineBox> page_lines(const imaging::GrayImage& page, const imaging::SegmentConfig& seg) {
  return imaging::segment_lines(imaging::binarize_otsu(page).image, seg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation-free OCR for connected right-to-left scripts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rtlocr 1.0.0");

  std::string config_file;
  std::uint64_t seed = 1;
  int jobs = 1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value file supplying defaults for this command");
    sub->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    sub->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };

  imaging::SegmentConfig seg;
  auto segment_opts = [&](CLI::App* sub) {
    sub->add_option("--min-line-height", seg.min_line_height)->capture_default_str();
    sub->add_option("--smoothing-radius", seg.smoothing_radius)->capture_default_str();
  };

  // binarize
  std::string in_path, out_path;
  auto* binarize = app.add_subcommand("binarize", "Otsu-binarize a page image");
  binarize->add_option("input", in_path)->required();
  binarize->add_option("-o,--output", out_path)->required();
  common(binarize);

  // segment
  std::string crops_dir;
  auto* segment = app.add_subcommand("segment", "List text line boxes of a page (JSON lines)");
  segment->add_option("input", in_path)->required();
  segment->add_option("-o,--output", crops_dir, "Write each line crop as NNN.png here");
  segment_opts(segment);
  common(segment);

  // synth
  synth::CorpusConfig corpus;
  std::string typeface_spec = "base", quality_name = "high";
  synth::QualityProfile quality;
  int pages = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic line corpus");
  synth_cmd->add_option("--lines", corpus.lines)->capture_default_str();
  synth_cmd->add_option("--typeface", typeface_spec, "base | derived:<seed> | typeface JSON")->capture_default_str();
  synth_cmd->add_option("--quality", quality_name)->capture_default_str()->check(CLI::IsMember({"high", "low"}));
  synth_cmd->add_option("--downscale", quality.downscale)->capture_default_str();
  synth_cmd->add_option("--speckle", quality.speckle)->capture_default_str();
  synth_cmd->add_option("--min-length", corpus.text_length.first)->capture_default_str();
  synth_cmd->add_option("--max-length", corpus.text_length.second)->capture_default_str();
  synth_cmd->add_option("--line-height", corpus.line_height)->capture_default_str();
  synth_cmd->add_option("--pages", pages, "Also compose this many page images from the lines")->capture_default_str();
  synth_cmd->add_option("-o,--output", out_path)->required();
  common(synth_cmd);

  // make-form
  std::vector<std::string> page_paths;
  std::string prefill, ui_bundle, title = "Line transcription";
  auto* make_form = app.add_subcommand("make-form", "Build an offline transcription form from page images");
  make_form->add_option("pages", page_paths)->required();
  make_form->add_option("-o,--output", out_path, "Form file (.html)")->required();
  make_form->add_option("--prefill", prefill, "Plain text, one line per segmented line");
  make_form->add_option("--ui-bundle", ui_bundle, "JavaScript bundle to inline");
  make_form->add_option("--title", title)->capture_default_str();
  segment_opts(make_form);
  common(make_form);

  // import-transcription
  std::string manifest_path, lines_dir;
  bool allow_draft = false;
  auto* import_cmd = app.add_subcommand("import-transcription", "Turn a completed manifest into a dataset");
  import_cmd->add_option("--manifest", manifest_path)->required();
  import_cmd->add_option("--lines", lines_dir, "Line images written by make-form")->required();
  import_cmd->add_option("-o,--output", out_path)->required();
  import_cmd->add_flag("--allow-draft", allow_draft, "Import draft lines as well");
  common(import_cmd);

  // train
  train::TrainConfig tcfg;
  std::vector<std::string> data_dirs;
  std::string validation_dir, filter_spec = script::ScriptFilter::arabic().to_string();
  auto* train_cmd = app.add_subcommand("train", "Train a line recognizer");
  train_cmd->add_option("-d,--data", data_dirs, "Dataset directories (merged)")->required();
  train_cmd->add_option("--validation", validation_dir, "Explicit validation set instead of a split");
  train_cmd->add_option("-o,--output", out_path, "Run directory")->required();
  train_cmd->add_option("--hidden", tcfg.hidden)->capture_default_str();
  train_cmd->add_option("--learning-rate", tcfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--momentum", tcfg.momentum)->capture_default_str();
  train_cmd->add_option("--max-updates", tcfg.max_updates)->capture_default_str();
  train_cmd->add_option("--validation-fraction", tcfg.validation_fraction)->capture_default_str();
  train_cmd->add_option("--validation-interval", tcfg.validation_interval)->capture_default_str();
  train_cmd->add_option("--patience", tcfg.patience)->capture_default_str();
  train_cmd->add_option("--line-height", tcfg.line_height)->capture_default_str();
  train_cmd->add_option("--filter", filter_spec, "Script-only ranges, hex")->capture_default_str();
  common(train_cmd);

  // ocr
  std::string model_path;
  auto* ocr = app.add_subcommand("ocr", "Recognize the text lines of page images");
  ocr->add_option("-m,--model", model_path)->required();
  ocr->add_option("pages", page_paths)->required();
  segment_opts(ocr);
  common(ocr);

  // eval
  std::vector<std::string> model_paths;
  std::string json_out, work_label, quality_label, role = "testing";
  bool csv = false;
  auto* eval = app.add_subcommand("eval", "Score models on datasets (full and script-only accuracy)");
  eval->add_option("-m,--model", model_paths)->required();
  eval->add_option("-d,--data", data_dirs)->required();
  eval->add_option("--json", json_out, "Write the detailed report(s) here");
  eval->add_option("--work", work_label, "Work label for the table (default: dataset dir name)");
  eval->add_option("--quality", quality_label, "Quality label for the table");
  eval->add_option("--role", role)->capture_default_str();
  eval->add_option("--filter", filter_spec)->capture_default_str();
  eval->add_flag("--csv", csv, "CSV instead of an aligned table");
  common(eval);

  // inspect-model
  auto* inspect = app.add_subcommand("inspect-model", "Print a model's header");
  inspect->add_option("model", model_path)->required();
  common(inspect);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*binarize) {
      const auto r = imaging::binarize_otsu(imaging::load_image_file(in_path));
      imaging::write_png(r.image, out_path);
      std::cout << "threshold " << r.threshold << (r.degenerate ? " (degenerate)" : "") << '\n';
    } else if (*segment) {
      const auto page = imaging::load_image_file(in_path);
      const auto boxes = page_lines(page, seg);
      if (boxes.empty()) throw Error(Errc::kNoLinesFound, "no text lines in " + in_path);
      if (!crops_dir.empty()) fs::create_directories(crops_dir);
      for (size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        std::cout << nlohmann::json{{"line", i + 1}, {"top", b.top}, {"bottom", b.bottom}, {"left", b.left},
                                    {"right", b.right}}.dump()
                  << '\n';
        if (!crops_dir.empty()) {
          char name[32];
          std::snprintf(name, sizeof(name), "%03zu.png", i + 1);
          imaging::write_png(imaging::GrayImage(Eigen::MatrixXf(page.pixels.block(b.top, b.left, b.height(), b.width()))),
                             fs::path(crops_dir) / name);
        }
      }
    } else if (*synth_cmd) {
      const synth::Typeface tf = resolve_typeface(typeface_spec);
      quality.mode = synth::parse_quality(quality_name);
      corpus.seed = seed;
      const Dataset data = synth::generate_corpus(tf, quality, corpus);
      synth::write_corpus(data, tf, quality, corpus, out_path);
      if (pages > 0) {
        fs::create_directories(fs::path(out_path) / "pages");
        const size_t per_page = (data.size() + pages - 1) / static_cast<size_t>(pages);
        for (int p = 0; p < pages; ++p) {
          std::vector<imaging::GrayImage> lines;
          for (size_t i = p * per_page; i < std::min(data.size(), (p + 1) * per_page); ++i) {
            lines.push_back(imaging::to_page(data[i].image));
          }
          if (lines.empty()) break;
          char name[32];
          std::snprintf(name, sizeof(name), "page-%03d.png", p + 1);
          imaging::write_png(synth::compose_page(lines), fs::path(out_path) / "pages" / name);
        }
      }
      echo_config(synth_cmd, out_path);
      std::cout << "wrote " << data.size() << " lines (" << tf.id << ", " << quality_name << ") to " << out_path
                << '\n';
    } else if (*make_form) {
      transcribe::FormOptions opts;
      if (!prefill.empty()) opts.prefill = prefill;
      if (!ui_bundle.empty()) opts.ui_bundle = ui_bundle;
      opts.segment = seg;
      opts.title = title;
      opts.warn = warn;
      std::vector<fs::path> paths(page_paths.begin(), page_paths.end());
      const auto r = transcribe::make_form(paths, out_path, opts);
      std::cout << "form " << r.form.string() << " (" << r.skeleton.lines.size() << " lines)\n"
                << "manifest " << r.manifest.string() << "\nlines " << r.lines_dir.string() << '\n';
    } else if (*import_cmd) {
      const auto r = transcribe::import_transcription(manifest_path, lines_dir, out_path, {allow_draft, warn});
      echo_config(import_cmd, out_path);
      std::cout << r.to_json().dump(2) << '\n';
      if (!r.digest_mismatch.empty()) return kData;
    } else if (*train_cmd) {
      tcfg.seed = seed;
      tcfg.jobs = jobs;
      tcfg.run_dir = out_path;
      tcfg.filter = script::ScriptFilter::parse(filter_spec);
      tcfg.validate();
      echo_config(train_cmd, out_path);
      std::vector<Dataset> parts;
      for (const auto& d : data_dirs) {
        store::LoadOptions lo;
        lo.line_height = tcfg.line_height;
        lo.warn = warn;
        parts.push_back(store::load_dataset(d, lo));
      }
      const Dataset data = merge_datasets(parts);
      auto progress = [](const train::ValidationPoint& p) {
        std::cerr << "updates " << p.updates << "  loss " << p.mean_loss << "  full " << p.full_accuracy << "  ar "
                  << p.script_accuracy << '\n';
      };
      train::TrainResult result;
      if (validation_dir.empty()) {
        result = train::train(data, tcfg, progress);
      } else {
        store::LoadOptions lo;
        lo.line_height = tcfg.line_height;
        lo.warn = warn;
        result = train::train(data, store::load_dataset(validation_dir, lo), tcfg, progress);
      }
      store::save_model(result.model, fs::path(out_path) / "best.korm");
      store::write_atomic(fs::path(out_path) / "report.json", result.report.to_json().dump(2) + "\n");
      std::cout << "best at " << (result.report.best_updates ? std::to_string(*result.report.best_updates) : "-")
                << " updates, stopped on " << result.report.stop_reason << ", "
                << result.report.skipped_infeasible << " infeasible samples skipped\n";
    } else if (*ocr) {
      const OcrModel model = store::load_model(model_path);
      for (const auto& p : page_paths) {
        const auto page = imaging::load_image_file(p);
        const auto boxes = page_lines(page, seg);
        if (boxes.empty()) warn("no text lines in " + p);
        std::vector<std::string> out(boxes.size());
        parallel_for(boxes.size(), jobs, [&](size_t i) {
          out[i] = text::u32_to_utf8(model.recognize(imaging::normalize_line(page, boxes[i], model.line_height)).text);
        });
        for (const auto& line : out) std::cout << line << '\n';
      }
    } else if (*eval) {
      const auto filter = script::ScriptFilter::parse(filter_spec);
      std::vector<evaluate::TableRow> rows;
      nlohmann::json details = nlohmann::json::array();
      for (const auto& mp : model_paths) {
        const OcrModel model = store::load_model(mp);
        for (const auto& d : data_dirs) {
          store::LoadOptions lo;
          lo.line_height = model.line_height;
          lo.warn = warn;
          const Dataset data = store::load_dataset(d, lo);
          const auto report = evaluate::evaluate(model, data, filter, jobs);
          const std::string work = work_label.empty() ? fs::path(d).lexically_normal().filename().string() : work_label;
          rows.push_back({fs::path(mp).stem().string(), work.empty() ? d : work, quality_label, role,
                          report.full_accuracy, report.script_accuracy});
          auto j = report.to_json();
          j["model"] = mp;
          j["data"] = d;
          details.push_back(j);
        }
      }
      std::cout << (csv ? evaluate::format_csv(rows) : evaluate::format_table(rows));
      if (!json_out.empty()) store::write_atomic(json_out, details.dump(2) + "\n");
    } else if (*inspect) {
      const OcrModel m = store::load_model(model_path);
      nlohmann::json j;
      j["line_height"] = m.line_height;
      j["hidden"] = m.hidden_size();
      j["classes"] = m.network.classes();
      j["parameters"] = m.network.params().parameter_count();
      j["codec"] = text::u32_to_utf8(m.codec.chars());
      j["seed"] = m.metadata.seed;
      j["updates"] = m.metadata.updates;
      j["source_ids"] = m.metadata.source_ids;
      std::cout << j.dump(2) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return (e.code() == Errc::kInvalidConfig || e.code() == Errc::kInvalidArgument) ? kUsage : kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
