#include "printguard/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "printguard/nn/loss.hpp"

namespace printguard::nn {

namespace {

using DTensor = BasicTensor<double>;

DTensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  DTensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(static_cast<std::uint32_t>(hi - lo + 1));
}

void randomize_params(Layer<double>& layer, Rng& rng) {
  for (auto& p : layer.params()) {
    for (auto& v : p.value->values()) v = rng.uniform(-1.0, 1.0);
  }
}

// Wraps the loss so it can be probed like a layer: forward yields the scalar
// mean loss, backward scales its gradient.
class SoftmaxXentProbe final : public Layer<double> {
 public:
  explicit SoftmaxXentProbe(std::vector<int> labels) : labels_(std::move(labels)) {}
  std::string name() const override { return "softmax_xent"; }
  DTensor forward(const DTensor& x, Mode) override {
    last_ = softmax_crossentropy(x, std::span<const int>(labels_));
    return DTensor({1}, {last_.loss});
  }
  DTensor backward(const DTensor& g) override {
    DTensor out = last_.grad;
    for (auto& v : out.values()) v *= g[0];
    return out;
  }
  std::unique_ptr<Layer<double>> clone() const override { return std::make_unique<SoftmaxXentProbe>(*this); }

 private:
  std::vector<int> labels_;
  LossResult<double> last_;
};

double weighted_sum(const DTensor& y, const DTensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

struct Worst {
  double error = 0.0;
  std::string tensor;
};

// Central differences of L = sum(r * eval()) w.r.t. every element of `target`,
// where eval() reads `target`. Dividing by the realized step absorbs rounding
// in orig +/- step.
template <typename Eval>
DTensor numeric_gradient(DTensor& target, const DTensor& r, double step, Eval&& eval) {
  DTensor g(target.shape());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double orig = target[i];
    target[i] = orig + step;
    const double up_arg = target[i];
    const double up = weighted_sum(eval(), r);
    target[i] = orig - step;
    const double down_arg = target[i];
    const double down = weighted_sum(eval(), r);
    target[i] = orig;
    g[i] = (up - down) / (up_arg - down_arg);
  }
  return g;
}

Worst check_instance(GradcheckInstance& inst, Rng& rng, double step) {
  Layer<double>& layer = *inst.layer;
  const DTensor y = layer.forward(inst.input, inst.mode);
  const DTensor r = random_tensor(rng, y.shape());

  // Analytic gradients, copied before any re-forward overwrites the caches.
  const DTensor grad_input = layer.backward(r);
  std::vector<DTensor> grad_params;
  for (auto& p : layer.params()) grad_params.push_back(*p.grad);

  Worst worst;
  auto consider = [&](const DTensor& analytic, const DTensor& numeric, const std::string& name) {
    const double e = relative_error(analytic, numeric);
    if (!(e <= worst.error) || worst.tensor.empty()) worst = {e, name};
  };

  DTensor probe = inst.input;
  consider(grad_input, numeric_gradient(probe, r, step, [&] { return layer.forward(probe, inst.mode); }),
           "input");
  auto params = layer.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const DTensor num =
        numeric_gradient(*params[k].value, r, step, [&] { return layer.forward(inst.input, inst.mode); });
    consider(grad_params[k], num, params[k].name);
  }
  return worst;
}

}  // namespace

double relative_error(const DTensor& analytic, const DTensor& numeric) {
  if (analytic.shape() != numeric.shape()) throw ShapeError("relative_error: shape mismatch");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(std::max(na, nn));
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / denom;
}

std::vector<GradcheckCase> standard_gradcheck_cases() {
  std::vector<GradcheckCase> cases;
  cases.push_back({"conv2d", [](Rng& rng) {
                     const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 4);
                     const std::size_t kh = pick(rng, 1, 4), kw = pick(rng, 1, 4);
                     const std::size_t h = kh + pick(rng, 0, 4), w = kw + pick(rng, 0, 4);
                     auto layer = std::make_unique<Conv2D<double>>("conv2d", cin, cout, kh, kw);
                     randomize_params(*layer, rng);
                     return GradcheckInstance{std::move(layer), random_tensor(rng, {pick(rng, 1, 2), cin, h, w}),
                                              Mode::Train};
                   }});
  cases.push_back({"batchnorm", [](Rng& rng) {
                     const std::size_t c = pick(rng, 1, 3);
                     auto layer = std::make_unique<BatchNorm2D<double>>("batchnorm", c, 1e-5);
                     randomize_params(*layer, rng);
                     return GradcheckInstance{std::move(layer),
                                              random_tensor(rng, {pick(rng, 2, 3), c, pick(rng, 1, 3), pick(rng, 2, 4)}),
                                              Mode::Train};
                   }});
  cases.push_back({"batchnorm_infer", [](Rng& rng) {
                     const std::size_t c = pick(rng, 1, 3);
                     auto layer = std::make_unique<BatchNorm2D<double>>("batchnorm_infer", c, 1e-5);
                     randomize_params(*layer, rng);
                     for (auto& v : layer->running_mean().values()) v = rng.uniform(-0.5, 0.5);
                     for (auto& v : layer->running_var().values()) v = rng.uniform(0.5, 2.0);
                     return GradcheckInstance{std::move(layer),
                                              random_tensor(rng, {pick(rng, 1, 3), c, pick(rng, 1, 3), pick(rng, 1, 4)}),
                                              Mode::Infer};
                   }});
  cases.push_back({"maxpool", [](Rng& rng) {
                     const int window = static_cast<int>(pick(rng, 2, 3));
                     const std::size_t c = pick(rng, 1, 2);
                     const std::size_t h = pick(rng, 3, 8), w = pick(rng, 3, 8);
                     // Distinct values spaced well beyond the probe step keep every argmax stable.
                     const std::size_t n = 2 * c * h * w;
                     std::vector<double> vals(n);
                     for (std::size_t i = 0; i < n; ++i) vals[i] = 0.05 * static_cast<double>(i) - 1.0;
                     for (std::size_t i = n; i > 1; --i) std::swap(vals[i - 1], vals[rng.below(static_cast<std::uint32_t>(i))]);
                     return GradcheckInstance{std::make_unique<MaxPool2D<double>>("maxpool", window, window),
                                              DTensor({2, c, h, w}, std::move(vals)), Mode::Train};
                   }});
  cases.push_back({"dense", [](Rng& rng) {
                     const std::size_t in = pick(rng, 2, 9), out = pick(rng, 1, 5);
                     auto layer = std::make_unique<Dense<double>>("dense", in, out);
                     randomize_params(*layer, rng);
                     return GradcheckInstance{std::move(layer), random_tensor(rng, {pick(rng, 1, 3), in}), Mode::Train};
                   }});
  cases.push_back({"relu", [](Rng& rng) {
                     DTensor x = random_tensor(rng, {pick(rng, 1, 3), pick(rng, 1, 2), pick(rng, 2, 5), pick(rng, 2, 5)});
                     // Keep inputs clear of the kink at 0.
                     for (auto& v : x.values()) v = (v < 0 ? -0.05 : 0.05) + v;
                     return GradcheckInstance{std::make_unique<ReLU<double>>("relu"), std::move(x), Mode::Train};
                   }});
  cases.push_back({"flatten", [](Rng& rng) {
                     return GradcheckInstance{std::make_unique<Flatten<double>>("flatten"),
                                              random_tensor(rng, {pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4)}),
                                              Mode::Train};
                   }});
  cases.push_back({"softmax_xent", [](Rng& rng) {
                     const std::size_t n = pick(rng, 1, 4), k = pick(rng, 2, 4);
                     std::vector<int> labels(n);
                     for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint32_t>(k)));
                     return GradcheckInstance{std::make_unique<SoftmaxXentProbe>(std::move(labels)),
                                              random_tensor(rng, {n, k}, -3.0, 3.0), Mode::Train};
                   }});
  return cases;
}

GradcheckReport run_gradcheck(const std::vector<GradcheckCase>& cases, int configs_per_layer, double tolerance,
                              double step, std::uint64_t seed) {
  GradcheckReport report;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    GradcheckLayerReport lr;
    lr.layer = cases[c].layer;
    for (int k = 0; k < configs_per_layer; ++k) {
      const std::uint64_t config_seed = splitmix64(seed ^ (static_cast<std::uint64_t>(c) << 32) ^ static_cast<std::uint64_t>(k));
      Rng rng(config_seed, static_cast<std::uint64_t>(c));
      GradcheckInstance inst = cases[c].make(rng);
      const Worst w = check_instance(inst, rng, step);
      ++lr.configs;
      if (w.error > lr.worst_error || k == 0 || !std::isfinite(w.error)) {
        lr.worst_error = w.error;
        lr.worst_seed = config_seed;
        lr.worst_tensor = w.tensor;
      }
      if (!(w.error < tolerance)) lr.passed = false;
    }
    report.passed = report.passed && lr.passed;
    report.layers.push_back(std::move(lr));
  }
  return report;
}

}  // namespace printguard::nn
