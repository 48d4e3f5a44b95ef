#pragma once

#include <functional>

#include "invdes/denoiser.hpp"
#include "invdes/rng.hpp"
#include "invdes/schedule.hpp"
#include "invdes/tensor.hpp"

namespace invdes::diffusion {

// Forward perturbation x_t = sqrt(alpha) x0 + sqrt(1-alpha) eps.
ad::Tensor perturb(const ad::Tensor& x0, double t, const ad::Tensor& eps,
                   const NoiseSchedule& sched);
ad::Tensor perturb_given_alpha(const ad::Tensor& x0, double alpha, const ad::Tensor& eps);

// Denoising-direction estimate of the clean sample. Throws when alpha is
// below 1e-8 (the division blows up).
ad::Tensor estimate_x0(const ad::Tensor& x_t, double t, const ad::Tensor& eps_hat,
                       const NoiseSchedule& sched);
ad::Tensor estimate_x0_given_alpha(const ad::Tensor& x_t, double alpha,
                                   const ad::Tensor& eps_hat);

// Batched noise predictor: (B,d) standardized designs at time t -> (B,d).
using DenoiseFn = std::function<ad::Tensor(const ad::Tensor& x, double t)>;

DenoiseFn make_denoise_fn(const DenoiserWeights& w,
                          std::optional<ConditioningVector> cond = std::nullopt);

// Deterministic probability-flow sampler on a uniform time grid from t=1
// to t=0; each step moves to sqrt(alpha') x_hat + sqrt(1-alpha') eps_hat.
ad::Tensor ode_sample(const DenoiseFn& fn, int n_steps, ad::Tensor x1,
                      const NoiseSchedule& sched);

// Euler-Maruyama discretization of the reverse SDE, initialized from
// N(0, I); score = -eps_hat / sqrt(1-alpha). No noise on the final step;
// zero_noise drops the injected noise entirely (test mode).
ad::Tensor sde_sample(const DenoiseFn& fn, int n_steps, std::size_t batch, std::size_t dim,
                      const NoiseSchedule& sched, RngStream& rng, bool zero_noise = false);

ad::Tensor gaussian_rows(std::size_t rows, std::size_t cols, RngStream& rng);

}  // namespace invdes::diffusion
