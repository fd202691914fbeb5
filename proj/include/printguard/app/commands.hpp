#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "printguard/app/config.hpp"
#include "printguard/nn/gradcheck.hpp"
#include "printguard/nn/train.hpp"

namespace printguard::app {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBad = 2;

/// Builds and splits a corpus under `out_dir`; returns the manifest path.
fs::path cmd_generate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log);

struct TrainSummary {
  nn::TrainResult result;
  double final_val_accuracy = 0.0;
  double wall_seconds = 0.0;
};

/// Trains on the manifest's train split, validating on its validation split.
/// Writes the model plus <stem>.curve.csv, <stem>.summary.json and
/// <stem>.config.txt next to `model_out`.
TrainSummary cmd_train(const RunConfig& cfg, const fs::path& manifest, const fs::path& model_out, std::ostream& log);

struct EvalReport {
  nn::Metrics metrics;
  std::string json;  // exactly what was written to disk
};

/// Evaluates one split; writes metrics JSON to `metrics_out` and, when
/// `dump_dir` is non-empty, every misclassified PGM with its manifest entry.
EvalReport cmd_eval(const RunConfig& cfg, const fs::path& model, const fs::path& manifest, dataset::Split split,
                    const fs::path& metrics_out, const fs::path& dump_dir, std::ostream& log);

/// Prints `good|bad p_good p_bad`; returns 0 for good, 2 for bad, 1 on error.
int cmd_predict(const fs::path& model, const fs::path& image, std::ostream& out, std::ostream& err);

/// Prints the worst relative error per layer; 0 iff every layer passes.
int cmd_gradcheck(std::ostream& out, const std::vector<nn::GradcheckCase>& cases = nn::standard_gradcheck_cases());

/// Binarizes a PGM/PPM sheet, writes <stem>_<index>.pgm per word box and
/// <stem>_boxes.json; returns the number of segments.
std::size_t cmd_segment(const RunConfig& cfg, const fs::path& sheet, const fs::path& out_dir, std::ostream& log);

/// Binarize when the input is not already binary, then resize when it is not 45x132.
GrayImage standardize(const GrayImage& img);

}  // namespace printguard::app
