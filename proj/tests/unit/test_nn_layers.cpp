#include <gtest/gtest.h>

#include <cmath>

#include "printguard/core/rng.hpp"
#include "printguard/nn/gradcheck.hpp"
#include "printguard/nn/layers.hpp"
#include "printguard/nn/loss.hpp"
#include "printguard/nn/optimizer.hpp"

using namespace printguard;
using namespace printguard::nn;

namespace {

template <typename T = float>
BasicTensor<T> random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  BasicTensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.normal(0.0, scale));
  return t;
}

// Direct quadruple-loop cross-correlation.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = h - kh + 1, ow = wd - kw + 1;
  Tensor y({n, cout, oh, ow});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < cout; ++k)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b[k];
          for (std::size_t c = 0; c < cin; ++c)
            for (std::size_t di = 0; di < kh; ++di)
              for (std::size_t dj = 0; dj < kw; ++dj)
                acc += static_cast<double>(x[((s * cin + c) * h + i + di) * wd + j + dj]) *
                       w[((k * cin + c) * kh + di) * kw + dj];
          y[((s * cout + k) * oh + i) * ow + j] = static_cast<float>(acc);
        }
  return y;
}

Tensor pool_oracle(const Tensor& x, std::size_t win) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / win, ow = w / win;
  Tensor y({n, c, oh, ow});
  for (std::size_t s = 0; s < n * c; ++s)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        float m = -INFINITY;
        for (std::size_t a = 0; a < win; ++a)
          for (std::size_t b = 0; b < win; ++b) m = std::max(m, x[(s * h + i * win + a) * w + j * win + b]);
        y[(s * oh + i) * ow + j] = m;
      }
  return y;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

}  // namespace

// --- conv2d -------------------------------------------------------------------

TEST(Conv2d, IdentityKernel) {
  Rng rng(1, 1);
  const Tensor x = random_tensor(rng, {2, 1, 5, 7});
  const Tensor y = conv2d_forward(x, Tensor({1, 1, 1, 1}, 1.0f), Tensor({1}));
  EXPECT_EQ(y, x);
}

TEST(Conv2d, ZeroInputGivesBias) {
  Rng rng(2, 1);
  const Tensor y = conv2d_forward(Tensor({1, 2, 6, 6}), random_tensor(rng, {3, 2, 3, 3}), Tensor({3}, {1, -2, 0.5}));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 16; ++i) ASSERT_EQ(y[k * 16 + i], (std::array<float, 3>{1, -2, 0.5})[k]);
}

TEST(Conv2d, MatchesDirectSummation) {
  Rng rng(3, 1);
  const Tensor x = random_tensor(rng, {1, 2, 6, 8});
  const Tensor w = random_tensor(rng, {1, 2, 3, 3});
  const Tensor b = random_tensor(rng, {1});
  EXPECT_LT(max_abs_diff(conv2d_forward(x, w, b), conv_oracle(x, w, b)), 1e-6);
}

TEST(Conv2d, MatchesDirectSummationRandomShapes) {
  Rng rng(4, 1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t kh = 1 + rng.below(5), kw = 1 + rng.below(5);
    const std::size_t h = kh + rng.below(8), w = kw + rng.below(8);
    const std::size_t cin = 1 + rng.below(3), cout = 1 + rng.below(3), n = 1 + rng.below(3);
    const Tensor x = random_tensor(rng, {n, cin, h, w});
    const Tensor wt = random_tensor(rng, {cout, cin, kh, kw});
    const Tensor b = random_tensor(rng, {cout});
    ASSERT_LT(max_abs_diff(conv2d_forward(x, wt, b), conv_oracle(x, wt, b)), 1e-5);
  }
}

TEST(Conv2d, LinearInInput) {
  Rng rng(5, 1);
  const Tensor w = random_tensor(rng, {2, 3, 3, 2});
  const Tensor zero({2});
  const Tensor x = random_tensor(rng, {1, 3, 7, 6});
  const Tensor y = random_tensor(rng, {1, 3, 7, 6});
  Tensor mix(x.shape());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0f * x[i] - 0.5f * y[i];
  const Tensor fx = conv2d_forward(x, w, zero), fy = conv2d_forward(y, w, zero);
  const Tensor fm = conv2d_forward(mix, w, zero);
  for (std::size_t i = 0; i < fm.size(); ++i) ASSERT_NEAR(fm[i], 2.0f * fx[i] - 0.5f * fy[i], 1e-5);
}

TEST(Conv2d, ShapeErrors) {
  EXPECT_THROW(conv2d_forward(Tensor({1, 1, 3, 3}), Tensor({1, 1, 4, 1}), Tensor({1})), ShapeError);
  EXPECT_THROW(conv2d_forward(Tensor({1, 2, 3, 3}), Tensor({1, 1, 2, 2}), Tensor({1})), ShapeError);
  EXPECT_THROW(conv2d_forward(Tensor({1, 1, 3, 3}), Tensor({2, 1, 2, 2}), Tensor({1})), ShapeError);
  EXPECT_THROW(conv2d_forward(Tensor({3, 3}), Tensor({1, 1, 2, 2}), Tensor({1})), ShapeError);
}

TEST(Conv2d, BackwardMatchesFiniteDifferences) {
  Rng rng(6, 1);
  using D = BasicTensor<double>;
  const D x = random_tensor<double>(rng, {1, 2, 6, 8});
  const D w = random_tensor<double>(rng, {1, 2, 3, 3});
  const D b = random_tensor<double>(rng, {1});
  const D r = random_tensor<double>(rng, {1, 1, 4, 6});
  auto loss = [&](const D& xx, const D& ww) {
    const D y = conv2d_forward(xx, ww, b);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  const auto g = conv2d_backward(x, w, r);
  D num_x(x.shape()), num_w(w.shape());
  const double h = 1e-3;
  for (std::size_t i = 0; i < x.size(); ++i) {
    D p = x, m = x;
    p[i] += h;
    m[i] -= h;
    num_x[i] = (loss(p, w) - loss(m, w)) / (2 * h);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    D p = w, m = w;
    p[i] += h;
    m[i] -= h;
    num_w[i] = (loss(x, p) - loss(x, m)) / (2 * h);
  }
  EXPECT_LT(relative_error(g.input, num_x), 1e-4);
  EXPECT_LT(relative_error(g.weight, num_w), 1e-4);
  double bias_grad = 0;
  for (double v : r.values()) bias_grad += v;
  EXPECT_NEAR(g.bias[0], bias_grad, 1e-9);
}

// --- maxpool ------------------------------------------------------------------

TEST(MaxPool, ConstantInput) {
  const Tensor y = maxpool_forward(Tensor({1, 2, 9, 9}, 3.5f), 3, 3, nullptr);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 3, 3}));
  for (float v : y.values()) EXPECT_EQ(v, 3.5f);
}

TEST(MaxPool, CountingGrid) {
  Tensor x({1, 1, 6, 6});
  for (std::size_t i = 0; i < 36; ++i) x[i] = static_cast<float>(i + 1);
  EXPECT_EQ(maxpool_forward(x, 3, 3, nullptr), Tensor({1, 1, 2, 2}, {15, 18, 33, 36}));
}

TEST(MaxPool, FloorSemanticsOnNetworkShape) {
  EXPECT_EQ(maxpool_forward(Tensor({1, 3, 41, 123}), 3, 3, nullptr).shape(), (Shape{1, 3, 13, 41}));
}

TEST(MaxPool, MatchesScanOracle) {
  Rng rng(7, 1);
  for (int t = 0; t < 30; ++t) {
    const Tensor x = random_tensor(rng, {1 + rng.below(2), 1 + rng.below(3), 3 + rng.below(10), 3 + rng.below(10)});
    ASSERT_EQ(max_abs_diff(maxpool_forward(x, 3, 3, nullptr), pool_oracle(x, 3)), 0.0);
  }
}

TEST(MaxPool, BackwardRoutesToFirstMaximum) {
  Tensor x({1, 1, 3, 3}, 1.0f);
  x[4] = 5.0f;
  x[7] = 5.0f;
  std::vector<std::size_t> arg;
  maxpool_forward(x, 3, 3, &arg);
  const Tensor g = maxpool_backward(x.shape(), arg, Tensor({1, 1, 1, 1}, 2.0f));
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(g[i], i == 4 ? 2.0f : 0.0f);
}

TEST(MaxPool, TiesPickFirstInRowMajorScan) {
  std::vector<std::size_t> arg;
  maxpool_forward(Tensor({1, 1, 3, 3}, 0.0f), 3, 3, &arg);
  ASSERT_EQ(arg.size(), 1u);
  EXPECT_EQ(arg[0], 0u);
}

// --- batch norm ---------------------------------------------------------------

TEST(BatchNorm, ThreeValueExample) {
  BatchNorm2D<double> bn("bn", 1, 0.0);
  const BasicTensor<double> x({3, 1, 1, 1}, {1, 2, 3});
  const auto y = bn.forward(x, Mode::Train);
  const double s = std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(y[0], -1 / s, 1e-9);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  EXPECT_NEAR(y[2], 1 / s, 1e-9);
  EXPECT_NEAR(y[2], 1.2247, 1e-4);
}

TEST(BatchNorm, ConstantBatchIsNearZero) {
  BatchNorm2D<float> bn("bn", 2);
  const Tensor y = bn.forward(Tensor({4, 2, 3, 3}, 7.0f), Mode::Train);
  for (float v : y.values()) EXPECT_LE(std::abs(v), 1e-3f);
}

TEST(BatchNorm, AffineContract) {
  Rng rng(8, 1);
  BatchNorm2D<float> plain("a", 2), affine("b", 2);
  affine.gamma().fill(2.0f);
  affine.beta().fill(1.0f);
  const Tensor x = random_tensor(rng, {5, 2, 3, 4});
  const Tensor a = plain.forward(x, Mode::Train);
  const Tensor b = affine.forward(x, Mode::Train);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_FLOAT_EQ(b[i], 2.0f * a[i] + 1.0f);
}

TEST(BatchNorm, NormalizedStatistics) {
  Rng rng(9, 1);
  for (int t = 0; t < 10; ++t) {
    BatchNorm2D<float> bn("bn", 3);
    const Tensor x = random_tensor(rng, {8, 3, 5, 6}, 1.0 + t);
    const Tensor y = bn.forward(x, Mode::Train);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0, s2 = 0;
      const double m = 8 * 30;
      for (std::size_t n = 0; n < 8; ++n)
        for (std::size_t i = 0; i < 30; ++i) {
          const double v = y[(n * 3 + c) * 30 + i];
          s += v;
          s2 += v * v;
        }
      EXPECT_LE(std::abs(s / m), 1e-4);
      EXPECT_NEAR(s2 / m - (s / m) * (s / m), 1.0, 1e-3);
    }
  }
}

TEST(BatchNorm, RunningStatisticsUpdate) {
  BatchNorm2D<double> bn("bn", 1, 0.0);
  bn.forward(BasicTensor<double>({3, 1, 1, 1}, {1, 2, 3}), Mode::Train);
  EXPECT_NEAR(bn.running_mean()[0], 0.9 * 0 + 0.1 * 2, 1e-12);
  EXPECT_NEAR(bn.running_var()[0], 0.9 * 1 + 0.1 * (2.0 / 3.0), 1e-12);
}

TEST(BatchNorm, InferUsesRunningStatistics) {
  BatchNorm2D<double> bn("bn", 1, 0.0);
  bn.running_mean()[0] = 1.0;
  bn.running_var()[0] = 4.0;
  const auto y = bn.forward(BasicTensor<double>({1, 1, 1, 2}, {3, -1}), Mode::Infer);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], -1.0);
}

TEST(BatchNorm, TrainNeedsTwoSamples) {
  BatchNorm2D<float> bn("bn", 1);
  EXPECT_THROW(bn.forward(Tensor({1, 1, 2, 2}), Mode::Train), InvalidArgument);
  EXPECT_NO_THROW(bn.forward(Tensor({1, 1, 2, 2}), Mode::Infer));
}

// --- dense / relu ---------------------------------------------------------------

TEST(Dense, IdentityAndZero) {
  Rng rng(10, 1);
  Tensor eye({4, 4});
  for (std::size_t i = 0; i < 4; ++i) eye[i * 5] = 1.0f;
  const Tensor x = random_tensor(rng, {3, 4});
  EXPECT_EQ(dense_forward(x, eye, Tensor({4})), x);
  const Tensor b = random_tensor(rng, {4});
  const Tensor y = dense_forward(Tensor({2, 4}), random_tensor(rng, {4, 4}), b);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y[n * 4 + j], b[j]);
}

TEST(Dense, LinearInInput) {
  Rng rng(11, 1);
  const Tensor w = random_tensor(rng, {7, 4});
  const Tensor x = random_tensor(rng, {2, 7}), y = random_tensor(rng, {2, 7});
  Tensor mix(x.shape());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 3.0f * x[i] + 0.25f * y[i];
  const Tensor fx = dense_forward(x, w, Tensor({4})), fy = dense_forward(y, w, Tensor({4}));
  const Tensor fm = dense_forward(mix, w, Tensor({4}));
  for (std::size_t i = 0; i < fm.size(); ++i) ASSERT_NEAR(fm[i], 3.0f * fx[i] + 0.25f * fy[i], 1e-5);
}

TEST(Dense, ShapeErrors) {
  EXPECT_THROW(dense_forward(Tensor({2, 3}), Tensor({4, 2}), Tensor({2})), ShapeError);
  EXPECT_THROW(dense_forward(Tensor({2, 3}), Tensor({3, 2}), Tensor({3})), ShapeError);
}

TEST(ReLU, Conventions) {
  const Tensor x({1, 4}, {-2.0f, 0.0f, 0.5f, 3.0f});
  EXPECT_EQ(relu_forward(x), Tensor({1, 4}, {0, 0, 0.5f, 3}));
  EXPECT_EQ(relu_backward(x, Tensor({1, 4}, 1.0f)), Tensor({1, 4}, {0, 0, 1, 1}));
  EXPECT_EQ(relu_forward(Tensor({3}, -1.0f)), Tensor({3}, 0.0f));
  EXPECT_EQ(relu_forward(Tensor({3}, 2.0f)), Tensor({3}, 2.0f));
}

// --- loss -----------------------------------------------------------------------

TEST(SoftmaxXent, SymmetricCase) {
  const int label = 0;
  const auto r = softmax_crossentropy(Tensor({1, 2}, {0, 0}), std::span<const int>(&label, 1));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-7);
  EXPECT_FLOAT_EQ(r.probs[0], 0.5f);
  EXPECT_FLOAT_EQ(r.grad[0], -0.5f);
  EXPECT_FLOAT_EQ(r.grad[1], 0.5f);
}

TEST(SoftmaxXent, SaturatedCorrect) {
  const int label = 0;
  const auto r = softmax_crossentropy(BasicTensor<double>({1, 2}, {20, -20}), std::span<const int>(&label, 1));
  EXPECT_LT(r.loss, 1e-8);
}

TEST(SoftmaxXent, LargeLogitsStayFinite) {
  const int label = 1;
  const auto r = softmax_crossentropy(Tensor({1, 2}, {1000, -1000}), std::span<const int>(&label, 1));
  EXPECT_NEAR(r.loss, 2000.0, 1e-3);
  EXPECT_TRUE(std::isfinite(r.grad[0]));
}

TEST(SoftmaxXent, BatchMeanGradient) {
  Rng rng(12, 1);
  using D = BasicTensor<double>;
  const D logits = random_tensor<double>(rng, {5, 2}, 2.0);
  const std::vector<int> labels = {0, 1, 1, 0, 1};
  const auto r = softmax_crossentropy(logits, std::span<const int>(labels));
  D num(logits.shape());
  const double h = 1e-5;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    D p = logits, m = logits;
    p[i] += h;
    m[i] -= h;
    num[i] = (softmax_crossentropy(p, std::span<const int>(labels)).loss -
              softmax_crossentropy(m, std::span<const int>(labels)).loss) /
             (2 * h);
  }
  EXPECT_LT(relative_error(r.grad, num), 1e-5);
  for (std::size_t n = 0; n < 5; ++n) EXPECT_NEAR(r.probs[2 * n] + r.probs[2 * n + 1], 1.0, 1e-12);
}

TEST(SoftmaxXent, Errors) {
  const int label = 0, bad_label = 2;
  EXPECT_THROW(softmax_crossentropy(Tensor({1, 2}, {NAN, 0}), std::span<const int>(&label, 1)), InvalidArgument);
  EXPECT_THROW(softmax_crossentropy(Tensor({1, 2}, {INFINITY, 0}), std::span<const int>(&label, 1)), InvalidArgument);
  EXPECT_THROW(softmax_crossentropy(Tensor({1, 2}), std::span<const int>(&bad_label, 1)), InvalidArgument);
}

// --- SGD with momentum ----------------------------------------------------------

TEST(Sgdm, PlainSgdReduction) {
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.l2 = 0.0;
  cfg.learning_rate = 0.5;
  Tensor p({2}, {1.0f, -2.0f}), g({2}, {0.2f, 0.4f}), v({2});
  sgdm_step(p, g, v, cfg, true);
  EXPECT_FLOAT_EQ(p[0], 0.9f);
  EXPECT_FLOAT_EQ(p[1], -2.2f);
}

TEST(Sgdm, TwoStepExample) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.1;
  cfg.l2 = 0.0;
  BasicTensor<double> p({1}, 1.0), g({1}, 1.0), v({1});
  sgdm_step(p, g, v, cfg, true);
  EXPECT_NEAR(v[0], -0.1, 1e-15);
  EXPECT_NEAR(p[0], 0.9, 1e-15);
  sgdm_step(p, g, v, cfg, true);
  EXPECT_NEAR(v[0], -0.11, 1e-15);
  EXPECT_NEAR(p[0], 0.79, 1e-15);
}

TEST(Sgdm, VelocityDecaysGeometrically) {
  TrainConfig cfg;
  cfg.momentum = 0.5;
  cfg.l2 = 0.0;
  BasicTensor<double> p({1}, 0.0), g({1}, 0.0), v({1}, 1.0);
  for (int k = 1; k <= 5; ++k) {
    sgdm_step(p, g, v, cfg, true);
    EXPECT_NEAR(v[0], std::pow(0.5, k), 1e-15);
  }
}

TEST(Sgdm, L2OnlyOnDecayedTensors) {
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.l2 = 0.1;
  cfg.learning_rate = 1.0;
  BasicTensor<double> w({1}, 2.0), b({1}, 2.0), g({1}, 0.0), vw({1}), vb({1});
  sgdm_step(w, g, vw, cfg, true);
  sgdm_step(b, g, vb, cfg, false);
  EXPECT_NEAR(w[0], 2.0 - 0.2, 1e-15);
  EXPECT_EQ(b[0], 2.0);
}

TEST(Sgdm, ShapeMismatch) {
  TrainConfig cfg;
  Tensor p({2}), g({3}), v({2});
  EXPECT_THROW(sgdm_step(p, g, v, cfg, true), ShapeError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.minibatch = 1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

// --- gradient check harness -----------------------------------------------------

namespace {

// Forward is ReLU; backward deliberately doubles the gradient.
class BrokenReLU final : public Layer<double> {
 public:
  std::string name() const override { return "broken_relu"; }
  BasicTensor<double> forward(const BasicTensor<double>& x, Mode) override {
    input_ = x;
    return relu_forward(x);
  }
  BasicTensor<double> backward(const BasicTensor<double>& g) override {
    auto out = relu_backward(input_, g);
    for (auto& v : out.values()) v *= 2.0;
    return out;
  }
  std::unique_ptr<Layer<double>> clone() const override { return std::make_unique<BrokenReLU>(*this); }

 private:
  BasicTensor<double> input_;
};

}  // namespace

TEST(Gradcheck, StockLayersPass) {
  const auto report = run_gradcheck(standard_gradcheck_cases());
  EXPECT_TRUE(report.passed);
  std::set<std::string> names;
  for (const auto& l : report.layers) {
    names.insert(l.layer);
    EXPECT_GE(l.configs, 10) << l.layer;
    EXPECT_LT(l.worst_error, 1e-4) << l.layer;
  }
  for (const char* n : {"conv2d", "batchnorm", "maxpool", "dense", "relu", "softmax_xent"}) EXPECT_TRUE(names.count(n));
}

TEST(Gradcheck, BrokenBackwardIsReported) {
  std::vector<GradcheckCase> cases = {{"broken_relu", [](Rng& rng) {
                                         GradcheckInstance inst;
                                         inst.layer = std::make_unique<BrokenReLU>();
                                         inst.input = BasicTensor<double>({2, 6});
                                         for (auto& v : inst.input.values()) {
                                           v = rng.normal(0, 1);
                                           v += v >= 0 ? 0.1 : -0.1;
                                         }
                                         return inst;
                                       }}};
  const auto report = run_gradcheck(cases);
  EXPECT_FALSE(report.passed);
  ASSERT_EQ(report.layers.size(), 1u);
  EXPECT_EQ(report.layers[0].layer, "broken_relu");
  EXPECT_FALSE(report.layers[0].passed);
  EXPECT_GT(report.layers[0].worst_error, 0.1);
}

TEST(Gradcheck, RelativeErrorDefinition) {
  const BasicTensor<double> a({2}, {3, 4}), b({2}, {3, 4}), z({2});
  EXPECT_EQ(relative_error(a, b), 0.0);
  EXPECT_EQ(relative_error(z, z), 0.0);
  EXPECT_NEAR(relative_error(a, z), 1.0, 1e-15);
}
