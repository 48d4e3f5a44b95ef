#pragma once

#include <cstdint>
#include <string>

#include "invdes/tensor.hpp"

namespace invdes::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam state for one parameter block. Moment accumulators
// start at zero; the step counter only grows.
struct AdamState {
  Tensor m, v;
  std::int64_t step = 0;
  AdamConfig cfg;

  static AdamState init(std::size_t rows, std::size_t cols, AdamConfig cfg = {});
};

// One Adam update in place. Throws on shape mismatch or non-finite
// gradients, naming `block` in the message.
void adam_step(Tensor& params, const Tensor& grad, AdamState& state,
               const std::string& block = "params");

}  // namespace invdes::ad
