#pragma once

#include <cstdint>
#include <vector>

#include "printguard/nn/layers.hpp"

namespace printguard::nn {

/// Where inference-mode batch-norm statistics come from: the exponential
/// running averages kept during training, or one pass over the whole
/// training set after the last iteration.
enum class NormStatistics { Running, Population };

struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.1;
  double l2 = 1e-4;  // weights and filters only
  int minibatch = 256;
  int epochs = 10;
  int validation_every = 50;
  std::uint64_t seed = 1;
  NormStatistics bn_statistics = NormStatistics::Population;

  void validate() const;
};

/// v' = momentum * v - lr * (grad + l2 * param) with the L2 term only when
/// `decay` is set; param' = param + v'.
template <typename T>
void sgdm_step(BasicTensor<T>& param, const BasicTensor<T>& grad, BasicTensor<T>& velocity, const TrainConfig& cfg,
               bool decay);

/// Holds one velocity per parameter, in the order params() returns them.
class SgdMomentum {
 public:
  explicit SgdMomentum(TrainConfig cfg) : cfg_(cfg) {}

  void step(const std::vector<Param<float>>& params);

 private:
  TrainConfig cfg_;
  std::vector<Tensor> velocity_;
};

}  // namespace printguard::nn
