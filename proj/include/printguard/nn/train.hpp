#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "printguard/core/image.hpp"
#include "printguard/nn/model.hpp"
#include "printguard/nn/optimizer.hpp"

namespace printguard::nn {

inline constexpr int kGood = 0;
inline constexpr int kBad = 1;

/// Read-only view over packed 8-bit images and their labels.
struct LabeledImages {
  std::size_t count = 0;
  int rows = 45;
  int cols = 132;
  std::span<const std::uint8_t> images;  // count * rows * cols
  std::span<const std::uint8_t> labels;  // count

  std::size_t pixels_per_image() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// N x 1 x rows x cols tensor of pixel / 255 for the selected samples.
Tensor make_batch(const LabeledImages& data, std::span<const std::size_t> indices);

struct CurvePoint {
  long iteration = 0;
  double train_loss = 0.0;     // mean minibatch loss since the previous point
  double val_accuracy = 0.0;   // NaN when no validation data was given
};

struct TrainResult {
  Model model;
  std::vector<CurvePoint> curve;
  long iterations = 0;
};

using ProgressFn = std::function<void(const CurvePoint&)>;

/// Replaces every batch-norm layer's running mean and variance with the exact
/// statistics of its input over `data`, layer by layer in network order so
/// each layer sees activations normalized by the already finalized ones.
void finalize_batchnorm(Model& model, const LabeledImages& data, std::size_t batch_size = 256);

/// Minibatch SGD with momentum. Samples are reshuffled every epoch from the
/// seeded stream and the last partial batch is kept. Validation accuracy is
/// recorded every cfg.validation_every iterations (global counter) and after
/// the last iteration. With population statistics the batch-norm layers are
/// finalized before that last validation point.
TrainResult train(const LabeledImages& data, const LabeledImages& val, const TrainConfig& cfg,
                  const Architecture& arch = {}, const ProgressFn& progress = {});

struct Metrics {
  double accuracy = 0.0;
  std::array<std::array<long, 2>, 2> confusion{};  // [true][predicted]
  std::vector<std::size_t> misclassified;          // positions within the evaluated data
  std::vector<int> predictions;
  double loss = 0.0;
};

/// Inference-mode evaluation. Argmax with ties going to "bad".
Metrics evaluate(Model& model, const LabeledImages& data, std::size_t batch_size = 256);

struct Prediction {
  int label = kBad;
  std::array<double, 2> probabilities{};
};

Prediction predict(Model& model, const GrayImage& img);

}  // namespace printguard::nn
