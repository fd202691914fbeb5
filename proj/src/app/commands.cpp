#include "printguard/app/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "json.hpp"
#include "printguard/core/pgm.hpp"

namespace printguard::app {

namespace {

using json = nlohmann::ordered_json;

const char* const kKindKeys[] = {"LPE", "LSE", "LSE_VERTICAL_SOLID", "BLOT", "good"};

std::string kind_key(const dataset::ManifestEntry& e) {
  return e.error_kind ? std::string(errorsim::to_string(*e.error_kind)) : "good";
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

GrayImage standardize(const GrayImage& img) {
  GrayImage out = img.is_binary() ? img : preprocess::binarize(img);
  if (out.height() != preprocess::kStandardRows || out.width() != preprocess::kStandardCols) {
    out = preprocess::resize_to_standard(out);
  }
  return out;
}

fs::path cmd_generate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_file(out_dir / "config.txt", render_config(cfg));
  auto built = dataset::build_dataset(cfg.data, cfg.seed, out_dir);
  for (const auto& line : built.log) log << "warning: " << line << "\n";
  const auto manifest = dataset::split_dataset(std::move(built.manifest), cfg.seed);
  const fs::path path = out_dir / "manifest.jsonl";
  dataset::write_manifest(path, manifest);

  std::map<std::string, std::map<std::string, long>> counts;  // kind -> split -> n
  std::map<std::string, long> split_totals;
  long good = 0;
  for (const auto& e : manifest) {
    const std::string split(dataset::to_string(*e.split));
    ++counts[kind_key(e)][split];
    ++split_totals[split];
    if (e.label == nn::kGood) ++good;
  }
  log << "samples " << manifest.size() << " (good " << good << ", bad " << manifest.size() - good << ", unviable "
      << built.unviable << ")\n";
  for (const char* k : kKindKeys) {
    log << "  " << k << ":";
    for (const char* s : {"train", "test", "validation"}) log << " " << s << " " << counts[k][s];
    log << "\n";
  }
  log << "splits: train " << split_totals["train"] << ", test " << split_totals["test"] << ", validation "
      << split_totals["validation"] << "\n";
  return path;
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& model_out,
                       std::ostream& log) {
  cfg.validate();
  const auto manifest = dataset::read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  const auto train_set = dataset::pack(manifest, dataset::Split::Train, root);
  const auto val_set = dataset::pack(manifest, dataset::Split::Validation, root);
  if (train_set.count == 0) throw dataset::ValidationError("manifest has no train split");
  ensure_parent(model_out);
  write_file(sibling(model_out, ".config.txt"), render_config(cfg));

  const nn::TrainConfig tc = cfg.train_config();
  log << "training on " << train_set.count << " samples, validating on " << val_set.count << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  TrainSummary s{nn::train(train_set.view(), val_set.view(), tc, cfg.architecture(),
                           [&](const nn::CurvePoint& p) {
                             log << "iter " << p.iteration << "  loss " << fixed4(p.train_loss) << "  val "
                                 << fixed4(p.val_accuracy) << "\n";
                             log.flush();
                           }),
                 0.0, 0.0};
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.final_val_accuracy = s.result.curve.empty() ? std::nan("") : s.result.curve.back().val_accuracy;

  nn::save_model(s.result.model, model_out);
  std::string csv = "iteration,train_loss,val_accuracy\n";
  for (const auto& p : s.result.curve) {
    char row[96];
    std::snprintf(row, sizeof row, "%ld,%.6f,%.6f\n", p.iteration, p.train_loss, p.val_accuracy);
    csv += row;
  }
  write_file(sibling(model_out, ".curve.csv"), csv);
  json summary;
  summary["iterations"] = s.result.iterations;
  summary["train_samples"] = train_set.count;
  summary["validation_samples"] = val_set.count;
  summary["final_val_accuracy"] = std::isnan(s.final_val_accuracy) ? json(nullptr) : json(s.final_val_accuracy);
  summary["wall_seconds"] = s.wall_seconds;
  write_file(sibling(model_out, ".summary.json"), summary.dump(2) + "\n");
  return s;
}

EvalReport cmd_eval(const RunConfig& cfg, const fs::path& model_path, const fs::path& manifest_path,
                    dataset::Split split, const fs::path& metrics_out, const fs::path& dump_dir, std::ostream& log) {
  nn::Model model = nn::load_model(model_path);
  const auto manifest = dataset::read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  const auto data = dataset::pack(manifest, split, root);
  if (data.count == 0) throw dataset::ValidationError("split '" + std::string(dataset::to_string(split)) + "' is empty");
  std::map<std::int64_t, const dataset::ManifestEntry*> by_id;
  for (const auto& e : manifest) by_id[e.id] = &e;

  EvalReport report{nn::evaluate(model, data.view()), {}};
  const nn::Metrics& m = report.metrics;

  std::map<std::string, std::pair<long, long>> per_kind;  // kind -> (count, correct)
  for (const char* k : kKindKeys) per_kind[k] = {0, 0};
  for (std::size_t i = 0; i < data.count; ++i) {
    auto& slot = per_kind[kind_key(*by_id.at(data.ids[i]))];
    ++slot.first;
    if (m.predictions[i] == data.labels[i]) ++slot.second;
  }

  json j;
  j["split"] = std::string(dataset::to_string(split));
  j["count"] = data.count;
  j["accuracy"] = m.accuracy;
  j["loss"] = m.loss;
  j["confusion"] = {{m.confusion[0][0], m.confusion[0][1]}, {m.confusion[1][0], m.confusion[1][1]}};
  json kinds = json::object();
  for (const char* k : kKindKeys) {
    const auto [count, correct] = per_kind[k];
    kinds[k] = {{"count", count},
                {"correct", correct},
                {"accuracy", count ? json(static_cast<double>(correct) / static_cast<double>(count)) : json(nullptr)}};
  }
  j["per_kind"] = kinds;
  json wrong = json::array();
  for (std::size_t pos : m.misclassified) wrong.push_back(data.ids[pos]);
  j["misclassified"] = wrong;
  report.json = j.dump(2) + "\n";

  ensure_parent(metrics_out);
  write_file(metrics_out, report.json);
  write_file(sibling(metrics_out, ".config.txt"), render_config(cfg));

  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    for (std::size_t pos : m.misclassified) {
      const auto& e = *by_id.at(data.ids[pos]);
      const std::string stem = fs::path(e.path).stem().string();
      fs::copy_file(root / e.path, dump_dir / (stem + ".pgm"), fs::copy_options::overwrite_existing);
      json meta = json::parse(dataset::manifest_line(e));
      meta["predicted"] = m.predictions[pos];
      write_file(dump_dir / (stem + ".json"), meta.dump(2) + "\n");
    }
  }
  log << "accuracy " << fixed4(m.accuracy) << " on " << data.count << " " << dataset::to_string(split)
      << " samples; confusion [[" << m.confusion[0][0] << ", " << m.confusion[0][1] << "], [" << m.confusion[1][0]
      << ", " << m.confusion[1][1] << "]]\n";
  for (const char* k : kKindKeys) {
    const auto [count, correct] = per_kind[k];
    if (count) log << "  " << k << ": " << correct << "/" << count << "\n";
  }
  return report;
}

int cmd_predict(const fs::path& model_path, const fs::path& image, std::ostream& out, std::ostream& err) {
  try {
    nn::Model model = nn::load_model(model_path);
    const GrayImage img = standardize(read_pgm(image));
    const auto p = nn::predict(model, img);
    char line[96];
    std::snprintf(line, sizeof line, "%s  %.6f %.6f\n", p.label == nn::kGood ? "good" : "bad", p.probabilities[0],
                  p.probabilities[1]);
    out << line;
    return p.label == nn::kGood ? kExitOk : kExitBad;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_gradcheck(std::ostream& out, const std::vector<nn::GradcheckCase>& cases) {
  const auto report = nn::run_gradcheck(cases);
  for (const auto& l : report.layers) {
    char line[192];
    std::snprintf(line, sizeof line, "%-16s configs %2d  worst %.3e  seed %llu  tensor %s  %s\n", l.layer.c_str(),
                  l.configs, l.worst_error, static_cast<unsigned long long>(l.worst_seed), l.worst_tensor.c_str(),
                  l.passed ? "PASS" : "FAIL");
    out << line;
  }
  if (!report.passed) {
    out << "gradient check failed:";
    for (const auto& l : report.layers) {
      if (!l.passed) out << " " << l.layer << " (seed " << l.worst_seed << ")";
    }
    out << "\n";
  }
  return report.passed ? kExitOk : kExitError;
}

std::size_t cmd_segment(const RunConfig& cfg, const fs::path& sheet_path, const fs::path& out_dir, std::ostream& log) {
  const std::string bytes = read_file(sheet_path);
  GrayImage gray;
  if (bytes.compare(0, 2, "P6") == 0) {
    const RgbImage rgb = read_ppm(sheet_path);
    gray = preprocess::to_grayscale(rgb.data, rgb.width, rgb.height);
  } else {
    gray = decode_pgm(bytes);
  }
  const GrayImage sheet = gray.is_binary() ? gray : preprocess::binarize(gray);
  const auto boxes = preprocess::segment_sheet(sheet, cfg.segmentation);

  fs::create_directories(out_dir);
  write_file(out_dir / "config.txt", render_config(cfg));
  const std::string stem = sheet_path.stem().string();
  json list = json::array();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const std::string name = stem + "_" + std::to_string(i) + ".pgm";
    write_pgm(out_dir / name, sheet.crop(b.row0, b.col0, b.row1, b.col1));
    list.push_back({{"index", i}, {"file", name}, {"row0", b.row0}, {"col0", b.col0}, {"row1", b.row1}, {"col1", b.col1}});
  }
  write_file(out_dir / (stem + "_boxes.json"), list.dump(2) + "\n");
  log << boxes.size() << " segments written to " << out_dir.string() << "\n";
  return boxes.size();
}

}  // namespace printguard::app
