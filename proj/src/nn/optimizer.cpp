#include "printguard/nn/optimizer.hpp"

namespace printguard::nn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw InvalidArgument("momentum must be in [0, 1)");
  if (!(l2 >= 0)) throw InvalidArgument("l2 must be non-negative");
  if (minibatch < 2) throw InvalidArgument("minibatch must be at least 2");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (validation_every < 1) throw InvalidArgument("validation_every must be positive");
}

template <typename T>
void sgdm_step(BasicTensor<T>& param, const BasicTensor<T>& grad, BasicTensor<T>& velocity, const TrainConfig& cfg,
               bool decay) {
  if (param.shape() != grad.shape() || param.shape() != velocity.shape()) {
    throw ShapeError("sgdm_step: parameter, gradient and velocity shapes differ");
  }
  const T lr = static_cast<T>(cfg.learning_rate);
  const T mom = static_cast<T>(cfg.momentum);
  const T l2 = decay ? static_cast<T>(cfg.l2) : T{0};
  T* p = param.data();
  const T* g = grad.data();
  T* v = velocity.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    v[i] = mom * v[i] - lr * (g[i] + l2 * p[i]);
    p[i] += v[i];
  }
}

template void sgdm_step(BasicTensor<float>&, const BasicTensor<float>&, BasicTensor<float>&, const TrainConfig&, bool);
template void sgdm_step(BasicTensor<double>&, const BasicTensor<double>&, BasicTensor<double>&, const TrainConfig&,
                        bool);

void SgdMomentum::step(const std::vector<Param<float>>& params) {
  if (velocity_.empty()) {
    for (const auto& p : params) velocity_.emplace_back(p.value->shape());
  }
  if (velocity_.size() != params.size()) throw ShapeError("SgdMomentum: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    sgdm_step(*params[i].value, *params[i].grad, velocity_[i], cfg_, params[i].decay);
  }
}

}  // namespace printguard::nn
