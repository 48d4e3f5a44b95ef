#include "invdes/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace invdes::diffusion {

using ad::Tensor;

Tensor perturb_given_alpha(const Tensor& x0, double alpha, const Tensor& eps) {
  if (!x0.same_shape(eps)) {
    throw std::invalid_argument("perturb: shape mismatch " + x0.shape_str() + " vs " +
                                eps.shape_str());
  }
  return ad::add(ad::smul(x0, std::sqrt(alpha)), ad::smul(eps, std::sqrt(1.0 - alpha)));
}

Tensor perturb(const Tensor& x0, double t, const Tensor& eps, const NoiseSchedule& sched) {
  return perturb_given_alpha(x0, sched.alpha(t), eps);
}

Tensor estimate_x0_given_alpha(const Tensor& x_t, double alpha, const Tensor& eps_hat) {
  if (alpha < 1e-8) {
    throw std::invalid_argument("estimate_x0: alpha below 1e-8, division blows up");
  }
  return ad::smul(ad::sub(x_t, ad::smul(eps_hat, std::sqrt(1.0 - alpha))),
                  1.0 / std::sqrt(alpha));
}

Tensor estimate_x0(const Tensor& x_t, double t, const Tensor& eps_hat,
                   const NoiseSchedule& sched) {
  return estimate_x0_given_alpha(x_t, sched.alpha(t), eps_hat);
}

DenoiseFn make_denoise_fn(const DenoiserWeights& w, std::optional<ConditioningVector> cond) {
  return [&w, cond](const Tensor& x, double t) { return denoiser_forward(w, x, t, cond); };
}

Tensor ode_sample(const DenoiseFn& fn, int n_steps, Tensor x1, const NoiseSchedule& sched) {
  if (n_steps < 1) throw std::invalid_argument("ode_sample needs n_steps >= 1");
  Tensor x = std::move(x1);
  for (int i = 0; i < n_steps; ++i) {
    const double t = 1.0 - static_cast<double>(i) / n_steps;
    const double t_next = 1.0 - static_cast<double>(i + 1) / n_steps;
    try {
      Tensor eps = fn(x, t);
      Tensor xhat = estimate_x0_given_alpha(x, sched.alpha(t), eps);
      x = perturb_given_alpha(xhat, sched.alpha(t_next), eps);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("ode_sample failed at step " + std::to_string(i) + ": " +
                               e.what());
    }
  }
  return x;
}

Tensor gaussian_rows(std::size_t rows, std::size_t cols, RngStream& rng) {
  Tensor out(rows, cols);
  for (std::size_t k = 0; k < out.numel(); ++k) out[k] = rng.normal();
  return out;
}

Tensor sde_sample(const DenoiseFn& fn, int n_steps, std::size_t batch, std::size_t dim,
                  const NoiseSchedule& sched, RngStream& rng, bool zero_noise) {
  if (n_steps < 1) throw std::invalid_argument("sde_sample needs n_steps >= 1");
  Tensor x = gaussian_rows(batch, dim, rng);
  const double dt = 1.0 / n_steps;
  for (int i = 0; i < n_steps; ++i) {
    const double t = 1.0 - static_cast<double>(i) / n_steps;
    const double beta = sched.beta(t);
    const double srt = std::sqrt(1.0 - sched.alpha(t));
    try {
      Tensor eps = fn(x, t);
      // drift of the reverse SDE with score -eps/sqrt(1-alpha)
      Tensor drift = ad::sub(x, ad::smul(eps, 2.0 / srt));
      x = ad::add(x, ad::smul(drift, beta * dt));
      if (!zero_noise && i + 1 < n_steps) {
        x = ad::add(x, ad::smul(gaussian_rows(batch, dim, rng), std::sqrt(2.0 * beta * dt)));
      }
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("sde_sample failed at step " + std::to_string(i) + ": " +
                               e.what());
    }
  }
  return x;
}

}  // namespace invdes::diffusion
