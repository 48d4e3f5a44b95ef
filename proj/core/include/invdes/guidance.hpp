#pragma once

#include <string>

#include "invdes/denoiser.hpp"
#include "invdes/energy.hpp"
#include "invdes/sampler.hpp"

namespace invdes::guidance {

enum class GuidanceMode { none, energy, conditional };
enum class EnergyVariant { linear, linear_unit, linear_norm, cvx };

const char* variant_name(EnergyVariant v);
EnergyVariant variant_from_name(const std::string& name);
GuidanceMode mode_from_name(const std::string& name);

struct GuidanceConfig {
  GuidanceMode mode = GuidanceMode::none;
  double lambda = 0.5;  // guidance scale (energy default; conditional uses 1.0)
  double tau = 0.1;     // Boltzmann temperature
  EnergyVariant variant = EnergyVariant::linear;
  diffusion::ConditioningVector cond{};
  bool jacobian_through_denoiser = false;

  void validate() const;  // lambda >= 0, tau > 0, cvx needs lambda in [0,1]
};

// Energy guidance: g = (1/tau) sqrt(1-alpha_t) grad E(x_hat), combined with
// the denoiser output per the configured variant. Works on standardized
// batches; each row costs one gradient evaluation of E. When the variant
// normalizes and the gradient is exactly zero the row falls back to the
// unmodified prediction.
ad::Tensor energy_guided_eps(const ad::Tensor& x_t, double t, const ad::Tensor& eps_hat,
                             const energy::EnergyModel& energy, const diffusion::DenoiserWeights& w,
                             const GuidanceConfig& cfg);

// Classifier-free combination (1+lambda) eps_cond - lambda eps_uncond; the
// unconditional branch is the same network with zeroed conditioning.
ad::Tensor cfg_eps(const diffusion::DenoiserWeights& w, const ad::Tensor& x_t, double t,
                   const diffusion::ConditioningVector& cond, double lambda);

// Wraps the base predictor with the configured guidance for the samplers.
diffusion::DenoiseFn make_guided_denoise_fn(const diffusion::DenoiserWeights& w,
                                            const energy::EnergyModel* energy,
                                            const GuidanceConfig& cfg);

}  // namespace invdes::guidance
