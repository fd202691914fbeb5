#pragma once

#include <span>

#include "printguard/nn/tensor.hpp"

namespace printguard::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;       // mean over the batch
  BasicTensor<T> probs;    // N x K softmax probabilities
  BasicTensor<T> grad;     // d(mean loss)/d(logits) = (p - onehot) / N
};

/// Softmax (max-subtracted) followed by crossentropy against integer labels.
/// Throws InvalidArgument on non-finite logits or out-of-range labels.
template <typename T>
LossResult<T> softmax_crossentropy(const BasicTensor<T>& logits, std::span<const int> labels);

}  // namespace printguard::nn
