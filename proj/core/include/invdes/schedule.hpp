#pragma once

namespace invdes::diffusion {

// Variance-preserving noise schedule with linear rate beta(t) on t in [0,1].
// The signal coefficient is alpha(t) = exp(-2 * int_0^t beta), so the
// forward marginal is x_t ~ N(sqrt(alpha) x_0, (1 - alpha) I).
struct NoiseSchedule {
  double beta_min = 0.05;
  double beta_max = 10.0;

  double beta(double t) const;
  double alpha(double t) const;      // throws outside [0,1]
  double sigma_bar(double t) const;  // sqrt(1-alpha)/sqrt(alpha)
};

}  // namespace invdes::diffusion
