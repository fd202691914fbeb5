#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "printguard/core/rng.hpp"
#include "printguard/nn/layers.hpp"

namespace printguard::nn {

/// One randomly configured layer plus the input to probe it with.
struct GradcheckInstance {
  std::unique_ptr<Layer<double>> layer;
  BasicTensor<double> input;
  Mode mode = Mode::Train;
};

struct GradcheckCase {
  std::string layer;
  std::function<GradcheckInstance(Rng&)> make;
};

struct GradcheckLayerReport {
  std::string layer;
  int configs = 0;
  double worst_error = 0.0;
  std::uint64_t worst_seed = 0;
  std::string worst_tensor;
  bool passed = true;
};

struct GradcheckReport {
  std::vector<GradcheckLayerReport> layers;
  bool passed = true;
};

/// Random configurations for every shipped layer and the softmax-crossentropy loss.
std::vector<GradcheckCase> standard_gradcheck_cases();

/// Relative error of one gradient tensor: ||analytic - numeric|| / max(||analytic||, ||numeric||),
/// zero when both vanish.
double relative_error(const BasicTensor<double>& analytic, const BasicTensor<double>& numeric);

/// Compares each layer's backward pass (input and parameter gradients) with
/// central finite differences of L = sum(r * forward(x)) for a random r.
/// Layers run in double precision so the difference quotient is not swamped
/// by rounding.
GradcheckReport run_gradcheck(const std::vector<GradcheckCase>& cases, int configs_per_layer = 10,
                              double tolerance = 1e-4, double step = 1e-3, std::uint64_t seed = 1);

}  // namespace printguard::nn
