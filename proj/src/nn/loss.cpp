#include "printguard/nn/loss.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace printguard::nn {

template <typename T>
LossResult<T> softmax_crossentropy(const BasicTensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("softmax_crossentropy: logits must be N x K");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n) throw ShapeError("softmax_crossentropy: label count mismatch");
  if (n == 0) throw InvalidArgument("softmax_crossentropy: empty batch");

  LossResult<T> r{0.0, BasicTensor<T>(logits.shape()), BasicTensor<T>(logits.shape())};
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const int label = labels[s];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw InvalidArgument("softmax_crossentropy: label " + std::to_string(label) + " out of range");
    }
    const T* z = logits.data() + s * k;
    double zmax = z[0];
    for (std::size_t j = 0; j < k; ++j) {
      if (!std::isfinite(static_cast<double>(z[j]))) throw InvalidArgument("softmax_crossentropy: non-finite logit");
      zmax = std::max(zmax, static_cast<double>(z[j]));
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(static_cast<double>(z[j]) - zmax);
      denom += p[j];
    }
    const auto lbl = static_cast<std::size_t>(label);
    // log-sum-exp form keeps the loss accurate when p[label] underflows
    total += std::log(denom) - (static_cast<double>(z[lbl]) - zmax);
    for (std::size_t j = 0; j < k; ++j) {
      p[j] /= denom;
      r.probs[s * k + j] = static_cast<T>(p[j]);
      r.grad[s * k + j] = static_cast<T>((p[j] - (j == lbl ? 1.0 : 0.0)) / static_cast<double>(n));
    }
  }
  r.loss = total / static_cast<double>(n);
  return r;
}

template LossResult<float> softmax_crossentropy(const BasicTensor<float>&, std::span<const int>);
template LossResult<double> softmax_crossentropy(const BasicTensor<double>&, std::span<const int>);

}  // namespace printguard::nn
