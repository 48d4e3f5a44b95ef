#pragma once

// Closed-form denoisers for synthetic data distributions; the oracles the
// trained networks and samplers are checked against.

#include <cmath>
#include <vector>

#include "invdes/sampler.hpp"
#include "invdes/schedule.hpp"
#include "invdes/tensor.hpp"

namespace testsupport {

// Data concentrated at a single point mu: the posterior mean of the noise
// is (x_t - sqrt(alpha) mu) / sqrt(1 - alpha).
inline invdes::diffusion::DenoiseFn dirac_denoiser(std::vector<double> mu,
                                                   invdes::diffusion::NoiseSchedule sched) {
  return [mu, sched](const invdes::ad::Tensor& x, double t) {
    const double a = sched.alpha(t);
    const double sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
    invdes::ad::Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - sa * mu[c]) / sn;
    }
    return out;
  };
}

// Standard-normal data stays standard normal under the VP forward process;
// the exact denoiser is sqrt(1 - alpha) x.
inline invdes::diffusion::DenoiseFn gaussian_denoiser(invdes::diffusion::NoiseSchedule sched) {
  return [sched](const invdes::ad::Tensor& x, double t) {
    return invdes::ad::smul(x, std::sqrt(1.0 - sched.alpha(t)));
  };
}

}  // namespace testsupport
