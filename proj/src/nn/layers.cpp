#include "printguard/nn/layers.hpp"

#include <cmath>
#include <limits>

namespace printguard::nn {

namespace {

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " + shape_string(s));
  }
}

}  // namespace

// --- conv2d ----------------------------------------------------------------

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(w.shape(), 4, "conv2d filters");
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != cin) throw ShapeError("conv2d: filter channels do not match input channels");
  if (b.size() != cout) throw ShapeError("conv2d: bias length does not match filter count");
  if (kh > h || kw > wd || kh == 0 || kw == 0) throw ShapeError("conv2d: filter does not fit inside input");
  const std::size_t oh = h - kh + 1, ow = wd - kw + 1;

  BasicTensor<T> y({n, cout, oh, ow});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t k = 0; k < cout; ++k) {
      T* plane = y.data() + (s * cout + k) * oh * ow;
      std::fill(plane, plane + oh * ow, b[k]);
      for (std::size_t c = 0; c < cin; ++c) {
        const T* in = x.data() + (s * cin + c) * h * wd;
        const T* f = w.data() + (k * cin + c) * kh * kw;
        for (std::size_t di = 0; di < kh; ++di) {
          for (std::size_t dj = 0; dj < kw; ++dj) {
            const T wv = f[di * kw + dj];
            for (std::size_t i = 0; i < oh; ++i) {
              const T* xr = in + (i + di) * wd + dj;
              T* yr = plane + i * ow;
              for (std::size_t j = 0; j < ow; ++j) yr[j] += wv * xr[j];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& grad_out,
                               bool need_input_grad) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(grad_out.shape(), 4, "conv2d output gradient");
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = h - kh + 1, ow = wd - kw + 1;
  if (grad_out.shape() != Shape{n, cout, oh, ow}) throw ShapeError("conv2d backward: gradient shape mismatch");

  Conv2dGrads<T> g;
  std::vector<double> gw(w.size(), 0.0);
  std::vector<double> gb(cout, 0.0);
  if (need_input_grad) g.input = BasicTensor<T>(x.shape());
  std::vector<T> row_acc(ow);

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t k = 0; k < cout; ++k) {
      const T* go = grad_out.data() + (s * cout + k) * oh * ow;
      double bsum = 0.0;
      for (std::size_t e = 0; e < oh * ow; ++e) bsum += go[e];
      gb[k] += bsum;
      for (std::size_t c = 0; c < cin; ++c) {
        const T* in = x.data() + (s * cin + c) * h * wd;
        const T* f = w.data() + (k * cin + c) * kh * kw;
        double* gf = gw.data() + (k * cin + c) * kh * kw;
        T* gin = need_input_grad ? g.input.data() + (s * cin + c) * h * wd : nullptr;
        for (std::size_t di = 0; di < kh; ++di) {
          for (std::size_t dj = 0; dj < kw; ++dj) {
            std::fill(row_acc.begin(), row_acc.end(), T{0});
            const T wv = f[di * kw + dj];
            for (std::size_t i = 0; i < oh; ++i) {
              const T* xr = in + (i + di) * wd + dj;
              const T* gr = go + i * ow;
              T* acc = row_acc.data();
              for (std::size_t j = 0; j < ow; ++j) acc[j] += gr[j] * xr[j];
              if (gin) {
                T* gir = gin + (i + di) * wd + dj;
                for (std::size_t j = 0; j < ow; ++j) gir[j] += wv * gr[j];
              }
            }
            double sum = 0.0;
            for (T v : row_acc) sum += v;
            gf[di * kw + dj] += sum;
          }
        }
      }
    }
  }
  g.weight = BasicTensor<T>(w.shape(), std::vector<T>(gw.begin(), gw.end()));
  g.bias = BasicTensor<T>({cout}, std::vector<T>(gb.begin(), gb.end()));
  return g;
}

// --- maxpool ---------------------------------------------------------------

template <typename T>
BasicTensor<T> maxpool_forward(const BasicTensor<T>& x, int window, int stride, std::vector<std::size_t>* argmax) {
  require_rank(x.shape(), 4, "maxpool input");
  if (window <= 0 || stride <= 0) throw InvalidArgument("maxpool: window and stride must be positive");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto win = static_cast<std::size_t>(window);
  const auto st = static_cast<std::size_t>(stride);
  const std::size_t oh = h >= win ? (h - win) / st + 1 : 0;
  const std::size_t ow = w >= win ? (w - win) / st + 1 : 0;
  BasicTensor<T> y({n, c, oh, ow});
  if (argmax) argmax->assign(y.size(), 0);
  std::size_t out = 0;
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++out) {
        std::size_t best = base + (i * st) * w + j * st;
        for (std::size_t di = 0; di < win; ++di) {
          for (std::size_t dj = 0; dj < win; ++dj) {
            const std::size_t idx = base + (i * st + di) * w + (j * st + dj);
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[out] = x[best];
        if (argmax) (*argmax)[out] = best;
      }
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                const BasicTensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) throw ShapeError("maxpool backward: gradient shape mismatch");
  BasicTensor<T> g(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += grad_out[o];
  return g;
}

// --- dense -----------------------------------------------------------------

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
  require_rank(x.shape(), 2, "dense input");
  require_rank(w.shape(), 2, "dense weight");
  const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(1);
  if (w.dim(0) != in) {
    throw ShapeError("dense: input width " + std::to_string(in) + " does not match weight " + shape_string(w.shape()));
  }
  if (b.size() != out) throw ShapeError("dense: bias length mismatch");
  BasicTensor<T> y({n, out});
  for (std::size_t s = 0; s < n; ++s) {
    T* yr = y.data() + s * out;
    std::copy(b.data(), b.data() + out, yr);
    const T* xr = x.data() + s * in;
    for (std::size_t i = 0; i < in; ++i) {
      const T xv = xr[i];
      if (xv == T{0}) continue;
      const T* wr = w.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& grad_out) {
  const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(1);
  if (grad_out.shape() != Shape{n, out}) throw ShapeError("dense backward: gradient shape mismatch");
  DenseGrads<T> g{BasicTensor<T>(x.shape()), BasicTensor<T>(w.shape()), BasicTensor<T>({out})};
  for (std::size_t s = 0; s < n; ++s) {
    const T* gr = grad_out.data() + s * out;
    const T* xr = x.data() + s * in;
    T* gx = g.input.data() + s * in;
    for (std::size_t o = 0; o < out; ++o) g.bias[o] += gr[o];
    for (std::size_t i = 0; i < in; ++i) {
      const T* wr = w.data() + i * out;
      T* gwr = g.weight.data() + i * out;
      const T xv = xr[i];
      T acc{0};
      for (std::size_t o = 0; o < out; ++o) {
        gwr[o] += xv * gr[o];
        acc += wr[o] * gr[o];
      }
      gx[i] = acc;
    }
  }
  return g;
}

// --- relu ------------------------------------------------------------------

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
  return y;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out) {
  if (x.shape() != grad_out.shape()) throw ShapeError("relu backward: gradient shape mismatch");
  BasicTensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T{0} ? grad_out[i] : T{0};
  return g;
}

// --- layer classes ---------------------------------------------------------

template <typename T>
Conv2D<T>::Conv2D(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel_rows,
                  std::size_t kernel_cols)
    : name_(std::move(name)),
      weight_({out_channels, in_channels, kernel_rows, kernel_cols}),
      bias_({out_channels}),
      grad_weight_(weight_.shape()),
      grad_bias_(bias_.shape()) {}

template <typename T>
BasicTensor<T> Conv2D<T>::forward(const BasicTensor<T>& x, Mode) {
  input_ = x;
  return conv2d_forward(x, weight_, bias_);
}

template <typename T>
BasicTensor<T> Conv2D<T>::backward(const BasicTensor<T>& grad_out) {
  auto g = conv2d_backward(input_, weight_, grad_out, input_grad_);
  grad_weight_ = std::move(g.weight);
  grad_bias_ = std::move(g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Param<T>> Conv2D<T>::params() {
  return {{name_ + ".weight", &weight_, &grad_weight_, true}, {name_ + ".bias", &bias_, &grad_bias_, false}};
}

template <typename T>
BatchNorm2D<T>::BatchNorm2D(std::string name, std::size_t channels, T epsilon, T momentum)
    : name_(std::move(name)),
      epsilon_(epsilon),
      momentum_(momentum),
      gamma_({channels}, T{1}),
      beta_({channels}, T{0}),
      grad_gamma_({channels}),
      grad_beta_({channels}),
      running_mean_({channels}, T{0}),
      running_var_({channels}, T{1}) {}

template <typename T>
BasicTensor<T> BatchNorm2D<T>::forward(const BasicTensor<T>& x, Mode mode) {
  require_rank(x.shape(), 4, "batchnorm input");
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (c != gamma_.size()) throw ShapeError("batchnorm: channel count mismatch");
  mode_ = mode;
  x_hat_ = BasicTensor<T>(x.shape());
  BasicTensor<T> y(x.shape());
  inv_std_.assign(c, 0.0);

  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      if (n < 2) throw InvalidArgument("batchnorm: train mode needs a batch of at least 2");
      const double m = static_cast<double>(n * hw);
      double sum = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const T* p = x.data() + (s * c + ch) * hw;
        for (std::size_t e = 0; e < hw; ++e) sum += p[e];
      }
      mean = sum / m;
      double sq = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const T* p = x.data() + (s * c + ch) * hw;
        for (std::size_t e = 0; e < hw; ++e) {
          const double d = p[e] - mean;
          sq += d * d;
        }
      }
      var = sq / m;
      const double keep = 1.0 - static_cast<double>(momentum_);
      running_mean_[ch] = static_cast<T>(keep * running_mean_[ch] + momentum_ * mean);
      running_var_[ch] = static_cast<T>(keep * running_var_[ch] + momentum_ * var);
    } else {
      mean = running_mean_[ch];
      var = running_var_[ch];
    }
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(epsilon_));
    inv_std_[ch] = inv;
    const T g = gamma_[ch];
    const T b = beta_[ch];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * hw;
      for (std::size_t e = 0; e < hw; ++e) {
        const T xh = static_cast<T>((x[off + e] - mean) * inv);
        x_hat_[off + e] = xh;
        y[off + e] = g * xh + b;
      }
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> BatchNorm2D<T>::backward(const BasicTensor<T>& grad_out) {
  if (grad_out.shape() != x_hat_.shape()) throw ShapeError("batchnorm backward: gradient shape mismatch");
  const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), hw = grad_out.dim(2) * grad_out.dim(3);
  BasicTensor<T> gx(grad_out.shape());
  const double m = static_cast<double>(n * hw);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0;
    double sum_dy_xh = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * hw;
      for (std::size_t e = 0; e < hw; ++e) {
        sum_dy += grad_out[off + e];
        sum_dy_xh += static_cast<double>(grad_out[off + e]) * x_hat_[off + e];
      }
    }
    grad_gamma_[ch] = static_cast<T>(sum_dy_xh);
    grad_beta_[ch] = static_cast<T>(sum_dy);
    const double g = gamma_[ch];
    const double inv = inv_std_[ch];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * hw;
      for (std::size_t e = 0; e < hw; ++e) {
        if (mode_ == Mode::Train) {
          // dx = gamma * inv / m * (m dy - sum dy - x_hat sum(dy x_hat))
          gx[off + e] = static_cast<T>(g * inv / m * (m * grad_out[off + e] - sum_dy - x_hat_[off + e] * sum_dy_xh));
        } else {
          gx[off + e] = static_cast<T>(g * inv * grad_out[off + e]);
        }
      }
    }
  }
  return gx;
}

template <typename T>
std::vector<Param<T>> BatchNorm2D<T>::params() {
  return {{name_ + ".gamma", &gamma_, &grad_gamma_, false}, {name_ + ".beta", &beta_, &grad_beta_, false}};
}

template <typename T>
std::vector<Buffer<T>> BatchNorm2D<T>::buffers() {
  return {{name_ + ".running_mean", &running_mean_}, {name_ + ".running_var", &running_var_}};
}

template <typename T>
BasicTensor<T> ReLU<T>::forward(const BasicTensor<T>& x, Mode) {
  input_ = x;
  return relu_forward(x);
}

template <typename T>
BasicTensor<T> ReLU<T>::backward(const BasicTensor<T>& grad_out) {
  return relu_backward(input_, grad_out);
}

template <typename T>
BasicTensor<T> MaxPool2D<T>::forward(const BasicTensor<T>& x, Mode) {
  input_shape_ = x.shape();
  return maxpool_forward(x, window_, stride_, &argmax_);
}

template <typename T>
BasicTensor<T> MaxPool2D<T>::backward(const BasicTensor<T>& grad_out) {
  return maxpool_backward(input_shape_, argmax_, grad_out);
}

template <typename T>
BasicTensor<T> Flatten<T>::forward(const BasicTensor<T>& x, Mode) {
  if (x.rank() < 1) throw ShapeError("flatten: rank-0 input");
  input_shape_ = x.shape();
  const std::size_t n = x.dim(0);
  return x.reshaped({n, n ? x.size() / n : 0});
}

template <typename T>
BasicTensor<T> Flatten<T>::backward(const BasicTensor<T>& grad_out) {
  return grad_out.reshaped(input_shape_);
}

template <typename T>
Dense<T>::Dense(std::string name, std::size_t inputs, std::size_t outputs)
    : name_(std::move(name)),
      weight_({inputs, outputs}),
      bias_({outputs}),
      grad_weight_(weight_.shape()),
      grad_bias_(bias_.shape()) {}

template <typename T>
BasicTensor<T> Dense<T>::forward(const BasicTensor<T>& x, Mode) {
  input_ = x;
  return dense_forward(x, weight_, bias_);
}

template <typename T>
BasicTensor<T> Dense<T>::backward(const BasicTensor<T>& grad_out) {
  auto g = dense_backward(input_, weight_, grad_out);
  grad_weight_ = std::move(g.weight);
  grad_bias_ = std::move(g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Param<T>> Dense<T>::params() {
  return {{name_ + ".weight", &weight_, &grad_weight_, true}, {name_ + ".bias", &bias_, &grad_bias_, false}};
}

#define PRINTGUARD_INSTANTIATE(T)                                                                                 \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);   \
  template Conv2dGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                          bool);                                                                 \
  template BasicTensor<T> maxpool_forward(const BasicTensor<T>&, int, int, std::vector<std::size_t>*);           \
  template BasicTensor<T> maxpool_backward(const Shape&, const std::vector<std::size_t>&, const BasicTensor<T>&); \
  template BasicTensor<T> dense_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);    \
  template DenseGrads<T> dense_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);    \
  template BasicTensor<T> relu_forward(const BasicTensor<T>&);                                                   \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                           \
  template class Conv2D<T>;                                                                                      \
  template class BatchNorm2D<T>;                                                                                 \
  template class ReLU<T>;                                                                                        \
  template class MaxPool2D<T>;                                                                                   \
  template class Flatten<T>;                                                                                     \
  template class Dense<T>;

PRINTGUARD_INSTANTIATE(float)
PRINTGUARD_INSTANTIATE(double)

#undef PRINTGUARD_INSTANTIATE

}  // namespace printguard::nn
