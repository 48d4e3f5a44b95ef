#include "invdes/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace invdes::ad {

AdamState AdamState::init(std::size_t rows, std::size_t cols, AdamConfig cfg) {
  AdamState s;
  s.m = Tensor(rows, cols, 0.0);
  s.v = Tensor(rows, cols, 0.0);
  s.step = 0;
  s.cfg = cfg;
  return s;
}

void adam_step(Tensor& params, const Tensor& grad, AdamState& state, const std::string& block) {
  if (!params.same_shape(grad) || !params.same_shape(state.m)) {
    throw std::invalid_argument("adam_step: shape mismatch for block '" + block + "': params " +
                                params.shape_str() + ", grad " + grad.shape_str());
  }
  if (!grad.all_finite()) {
    throw std::runtime_error("adam_step: non-finite gradient in block '" + block + "'");
  }
  state.step += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.numel(); ++i) {
    const double g = grad[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

}  // namespace invdes::ad
