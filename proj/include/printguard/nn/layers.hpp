#pragma once

#include <memory>
#include <string>
#include <vector>

#include "printguard/nn/tensor.hpp"

namespace printguard::nn {

enum class Mode { Train, Infer };

/// A learnable tensor and its gradient. `decay` marks tensors that receive L2.
template <typename T>
struct Param {
  std::string name;
  BasicTensor<T>* value = nullptr;
  BasicTensor<T>* grad = nullptr;
  bool decay = false;
};

/// A non-learnable state tensor that is still part of the model (running stats).
template <typename T>
struct Buffer {
  std::string name;
  BasicTensor<T>* value = nullptr;
};

// ---------------------------------------------------------------------------
// Kernels. Activations are N x C x H x W; filters are Cout x Cin x KH x KW.

/// Valid cross-correlation, stride 1: y[n,k,i,j] = b[k] + sum x[n,c,i+di,j+dj] * w[k,c,di,dj].
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b);

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> input;  // empty when not requested
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& grad_out,
                               bool need_input_grad = true);

/// Non-overlapping max pooling with floor semantics. `argmax` receives the
/// flat input index chosen for every output (first maximum in row-major scan).
template <typename T>
BasicTensor<T> maxpool_forward(const BasicTensor<T>& x, int window, int stride, std::vector<std::size_t>* argmax);

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                const BasicTensor<T>& grad_out);

/// y = x W + b for x of shape N x in, W of shape in x out.
template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b);

template <typename T>
struct DenseGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& grad_out);

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x);

/// Gradient passes only where x > 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out);

// ---------------------------------------------------------------------------

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string name() const = 0;
  virtual BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) = 0;
  /// Gradient w.r.t. the last forward input; parameter gradients are overwritten.
  virtual BasicTensor<T> backward(const BasicTensor<T>& grad_out) = 0;
  virtual std::vector<Param<T>> params() { return {}; }
  virtual std::vector<Buffer<T>> buffers() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

template <typename T>
class Conv2D final : public Layer<T> {
 public:
  Conv2D(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel_rows,
         std::size_t kernel_cols);

  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::vector<Param<T>> params() override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2D>(*this); }

  /// The first layer never needs its input gradient.
  void set_input_grad(bool enabled) { input_grad_ = enabled; }

  BasicTensor<T>& weight() { return weight_; }
  BasicTensor<T>& bias() { return bias_; }

 private:
  std::string name_;
  BasicTensor<T> weight_, bias_, grad_weight_, grad_bias_;
  BasicTensor<T> input_;
  bool input_grad_ = true;
};

/// Per-channel batch normalization over (N, H, W) with biased variance.
template <typename T>
class BatchNorm2D final : public Layer<T> {
 public:
  BatchNorm2D(std::string name, std::size_t channels, T epsilon = T(1e-5), T momentum = T(0.1));

  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::vector<Param<T>> params() override;
  std::vector<Buffer<T>> buffers() override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<BatchNorm2D>(*this); }

  BasicTensor<T>& gamma() { return gamma_; }
  BasicTensor<T>& beta() { return beta_; }
  BasicTensor<T>& running_mean() { return running_mean_; }
  BasicTensor<T>& running_var() { return running_var_; }
  T epsilon() const { return epsilon_; }
  T momentum() const { return momentum_; }
  void set_momentum(T momentum) { momentum_ = momentum; }

 private:
  std::string name_;
  T epsilon_;
  T momentum_;
  BasicTensor<T> gamma_, beta_, grad_gamma_, grad_beta_, running_mean_, running_var_;
  // cache
  Mode mode_ = Mode::Train;
  BasicTensor<T> x_hat_;
  std::vector<double> inv_std_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  explicit ReLU(std::string name) : name_(std::move(name)) {}
  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  std::string name_;
  BasicTensor<T> input_;
};

template <typename T>
class MaxPool2D final : public Layer<T> {
 public:
  MaxPool2D(std::string name, int window, int stride) : name_(std::move(name)), window_(window), stride_(stride) {}
  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2D>(*this); }

 private:
  std::string name_;
  int window_;
  int stride_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// N x ... -> N x (product of the rest), in C, H, W order.
template <typename T>
class Flatten final : public Layer<T> {
 public:
  explicit Flatten(std::string name) : name_(std::move(name)) {}
  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::string name_;
  Shape input_shape_;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::string name, std::size_t inputs, std::size_t outputs);

  std::string name() const override { return name_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::vector<Param<T>> params() override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

  BasicTensor<T>& weight() { return weight_; }
  BasicTensor<T>& bias() { return bias_; }

 private:
  std::string name_;
  BasicTensor<T> weight_, bias_, grad_weight_, grad_bias_;
  BasicTensor<T> input_;
};

}  // namespace printguard::nn
