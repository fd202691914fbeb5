#include "printguard/nn/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "printguard/core/rng.hpp"
#include "printguard/nn/loss.hpp"

namespace printguard::nn {

namespace {

constexpr std::uint64_t kShuffleStream = 2;

void check_view(const LabeledImages& d, const Architecture& arch) {
  if (d.images.size() != d.count * d.pixels_per_image() || d.labels.size() != d.count) {
    throw ShapeError("labeled image view: buffer sizes do not match the sample count");
  }
  if (d.count && (d.rows != arch.input_rows || d.cols != arch.input_cols)) {
    throw ShapeError("labeled image view: image size does not match the model input");
  }
  for (std::uint8_t l : d.labels) {
    if (l > 1) throw InvalidArgument("labels must be 0 (good) or 1 (bad)");
  }
}

int argmax_bad_on_tie(const float* p) { return p[kBad] >= p[kGood] ? kBad : kGood; }

}  // namespace

Tensor make_batch(const LabeledImages& data, std::span<const std::size_t> indices) {
  const std::size_t px = data.pixels_per_image();
  Tensor batch({indices.size(), 1, static_cast<std::size_t>(data.rows), static_cast<std::size_t>(data.cols)});
  float* out = batch.data();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= data.count) throw OutOfBounds("make_batch: sample index out of range");
    const std::uint8_t* src = data.images.data() + indices[b] * px;
    for (std::size_t i = 0; i < px; ++i) out[b * px + i] = static_cast<float>(src[i]) / 255.0f;
  }
  return batch;
}

void finalize_batchnorm(Model& model, const LabeledImages& data, std::size_t batch_size) {
  if (data.count == 0) throw InvalidArgument("finalize_batchnorm: empty data");
  check_view(data, model.arch());
  std::vector<std::size_t> idx;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    auto* bn = dynamic_cast<BatchNorm2D<float>*>(&model.layer(l));
    if (!bn) continue;
    const std::size_t channels = bn->running_mean().size();
    // Chan et al. pairwise merge of per-batch (count, mean, M2).
    std::vector<double> mean(channels, 0.0), m2(channels, 0.0);
    double count = 0.0;
    for (std::size_t start = 0; start < data.count; start += batch_size) {
      const std::size_t end = std::min(data.count, start + batch_size);
      idx.resize(end - start);
      std::iota(idx.begin(), idx.end(), start);
      Tensor x = make_batch(data, idx);
      for (std::size_t i = 0; i < l; ++i) x = model.layer(i).forward(x, Mode::Infer);
      const std::size_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
      const double nb = static_cast<double>(n * hw);
      for (std::size_t ch = 0; ch < channels; ++ch) {
        double s = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          const float* p = x.data() + (b * channels + ch) * hw;
          for (std::size_t e = 0; e < hw; ++e) s += p[e];
        }
        const double mb = s / nb;
        double q = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          const float* p = x.data() + (b * channels + ch) * hw;
          for (std::size_t e = 0; e < hw; ++e) q += (p[e] - mb) * (p[e] - mb);
        }
        const double total = count + nb;
        const double delta = mb - mean[ch];
        mean[ch] += delta * nb / total;
        m2[ch] += q + delta * delta * count * nb / total;
      }
      count += nb;
    }
    for (std::size_t ch = 0; ch < channels; ++ch) {
      bn->running_mean()[ch] = static_cast<float>(mean[ch]);
      bn->running_var()[ch] = static_cast<float>(m2[ch] / count);
    }
  }
}

TrainResult train(const LabeledImages& data, const LabeledImages& val, const TrainConfig& cfg,
                  const Architecture& arch, const ProgressFn& progress) {
  cfg.validate();
  if (data.count == 0) throw InvalidArgument("train: empty training set");
  check_view(data, arch);
  check_view(val, arch);

  TrainResult result{init_model(cfg.seed, arch), {}, 0};
  Model& model = result.model;
  SgdMomentum optimizer(cfg);
  Rng shuffle_rng(cfg.seed, kShuffleStream);
  std::vector<std::size_t> order(data.count);
  std::vector<int> labels;
  const auto batch = static_cast<std::size_t>(cfg.minibatch);

  double loss_sum = 0.0;
  long loss_count = 0;
  auto record = [&](long iteration) {
    CurvePoint pt{iteration, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                  std::numeric_limits<double>::quiet_NaN()};
    if (val.count) pt.val_accuracy = evaluate(model, val).accuracy;
    result.curve.push_back(pt);
    if (progress) progress(pt);
    loss_sum = 0.0;
    loss_count = 0;
  };

  long iteration = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.below(static_cast<std::uint32_t>(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      // A single leftover sample cannot be batch-normalized; fold it into training only when it can.
      if (end - start < 2 && arch.batch_norm) continue;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Tensor x = make_batch(data, idx);
      labels.resize(idx.size());
      for (std::size_t b = 0; b < idx.size(); ++b) labels[b] = data.labels[idx[b]];

      const Tensor logits = model.forward(x, Mode::Train);
      const auto loss = softmax_crossentropy(logits, std::span<const int>(labels));
      model.backward(loss.grad);
      optimizer.step(model.params());

      ++iteration;
      loss_sum += loss.loss;
      ++loss_count;
      if (iteration % cfg.validation_every == 0) record(iteration);
    }
  }
  if (iteration > 0 && arch.batch_norm && cfg.bn_statistics == NormStatistics::Population) {
    finalize_batchnorm(model, data);
    if (!result.curve.empty() && result.curve.back().iteration == iteration) {
      result.curve.back().val_accuracy =
          val.count ? evaluate(model, val).accuracy : std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (iteration > 0 && (result.curve.empty() || result.curve.back().iteration != iteration)) record(iteration);
  result.iterations = iteration;
  return result;
}

Metrics evaluate(Model& model, const LabeledImages& data, std::size_t batch_size) {
  if (data.count == 0) throw InvalidArgument("evaluate: empty data");
  check_view(data, model.arch());
  Metrics m;
  m.predictions.resize(data.count);
  std::vector<std::size_t> idx;
  std::vector<int> labels;
  double loss_total = 0.0;
  for (std::size_t start = 0; start < data.count; start += batch_size) {
    const std::size_t end = std::min(data.count, start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    labels.resize(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) labels[b] = data.labels[idx[b]];
    const Tensor logits = model.forward(make_batch(data, idx), Mode::Infer);
    const auto loss = softmax_crossentropy(logits, std::span<const int>(labels));
    loss_total += loss.loss * static_cast<double>(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const int pred = argmax_bad_on_tie(loss.probs.data() + 2 * b);
      const int truth = labels[b];
      m.predictions[idx[b]] = pred;
      ++m.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
      if (pred != truth) m.misclassified.push_back(idx[b]);
    }
  }
  m.accuracy = static_cast<double>(m.confusion[0][0] + m.confusion[1][1]) / static_cast<double>(data.count);
  m.loss = loss_total / static_cast<double>(data.count);
  return m;
}

Prediction predict(Model& model, const GrayImage& img) {
  const Architecture& a = model.arch();
  if (img.height() != a.input_rows || img.width() != a.input_cols) {
    throw ShapeError("predict: expected a " + std::to_string(a.input_rows) + "x" + std::to_string(a.input_cols) +
                     " image, got " + std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  const std::uint8_t label = 0;
  const LabeledImages one{1, a.input_rows, a.input_cols, img.pixels(), std::span<const std::uint8_t>(&label, 1)};
  const std::size_t index = 0;
  const Tensor logits = model.forward(make_batch(one, std::span<const std::size_t>(&index, 1)), Mode::Infer);
  const int dummy = kGood;
  const auto r = softmax_crossentropy(logits, std::span<const int>(&dummy, 1));
  Prediction p;
  p.probabilities = {static_cast<double>(r.probs[0]), static_cast<double>(r.probs[1])};
  p.label = argmax_bad_on_tie(r.probs.data());
  return p;
}

}  // namespace printguard::nn
