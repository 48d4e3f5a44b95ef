#include "invdes/guidance.hpp"

#include <cmath>
#include <stdexcept>

#include "invdes/tape.hpp"

namespace invdes::guidance {

using ad::Tensor;
using ad::Value;
using diffusion::ConditioningVector;
using diffusion::DenoiserWeights;

const char* variant_name(EnergyVariant v) {
  switch (v) {
    case EnergyVariant::linear: return "linear";
    case EnergyVariant::linear_unit: return "linear-unit";
    case EnergyVariant::linear_norm: return "linear-norm";
    case EnergyVariant::cvx: return "cvx";
  }
  return "?";
}

EnergyVariant variant_from_name(const std::string& name) {
  for (EnergyVariant v : {EnergyVariant::linear, EnergyVariant::linear_unit,
                          EnergyVariant::linear_norm, EnergyVariant::cvx}) {
    if (name == variant_name(v)) return v;
  }
  throw std::invalid_argument("unknown guidance variant '" + name + "'");
}

GuidanceMode mode_from_name(const std::string& name) {
  if (name == "none") return GuidanceMode::none;
  if (name == "energy") return GuidanceMode::energy;
  if (name == "conditional") return GuidanceMode::conditional;
  throw std::invalid_argument("unknown guidance mode '" + name + "'");
}

void GuidanceConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("guidance lambda must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("guidance tau must be > 0");
  if (mode == GuidanceMode::energy && variant == EnergyVariant::cvx &&
      (lambda < 0.0 || lambda > 1.0)) {
    throw std::invalid_argument("cvx variant needs lambda in [0,1]");
  }
}

namespace {

// Gradient of E in standardized coordinates at one standardized design row,
// optionally pulled back through the denoiser (Jacobian of x_hat w.r.t.
// x_t). Counts one energy evaluation.
std::vector<double> grad_e_std(const energy::EnergyModel& energy, const DenoiserWeights& w,
                               const std::vector<double>& xhat_std) {
  sim::Design design{w.standardizer.destandardize(xhat_std)};
  auto [cost, grad_raw] = energy.cost_gradient(design);
  std::vector<double> g(grad_raw.size());
  for (std::size_t c = 0; c < g.size(); ++c) g[c] = grad_raw[c] * w.standardizer.scale[c];
  return g;
}

}  // namespace

Tensor energy_guided_eps(const Tensor& x_t, double t, const Tensor& eps_hat,
                         const energy::EnergyModel& energy, const DenoiserWeights& w,
                         const GuidanceConfig& cfg) {
  cfg.validate();
  if (cfg.mode != GuidanceMode::energy) {
    throw std::invalid_argument("energy_guided_eps called with mode != energy");
  }
  const double alpha = w.schedule.alpha(t);
  const double srt = std::sqrt(1.0 - alpha);
  const Tensor xhat = diffusion::estimate_x0_given_alpha(x_t, alpha, eps_hat);
  const std::size_t B = x_t.rows(), d = x_t.cols();

  Tensor out = eps_hat;
  for (std::size_t r = 0; r < B; ++r) {
    std::vector<double> xr(d);
    for (std::size_t c = 0; c < d; ++c) xr[c] = xhat(r, c);

    std::vector<double> g = grad_e_std(energy, w, xr);
    if (cfg.jacobian_through_denoiser) {
      // pull the gradient back through x_hat(x_t) = (x_t - srt eps(x_t))/sa
      ad::Tape tape;
      std::vector<Value> params;
      for (const Tensor& p : w.params) params.push_back(tape.constant(p));
      Tensor xrow(1, d);
      for (std::size_t c = 0; c < d; ++c) xrow(0, c) = x_t(r, c);
      Value xin = tape.input(xrow);
      Tensor trow(1, 1, t);
      Value eps = diffusion::denoiser_forward_t(tape, w, params, xin, trow, nullptr);
      Value xh = smul(sub(xin, smul(eps, srt)), 1.0 / std::sqrt(alpha));
      Tensor seed(1, d);
      for (std::size_t c = 0; c < d; ++c) seed(0, c) = g[c];
      const std::pair<Value, Tensor> sd{xh, seed};
      Tensor pulled = tape.backward_seeded({&sd, 1}, {&xin, 1})[0];
      for (std::size_t c = 0; c < d; ++c) g[c] = pulled(0, c);
    }
    for (double& v : g) v *= srt / cfg.tau;

    double gnorm = 0.0, enorm = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      gnorm += g[c] * g[c];
      enorm += eps_hat(r, c) * eps_hat(r, c);
    }
    gnorm = std::sqrt(gnorm);
    enorm = std::sqrt(enorm);

    switch (cfg.variant) {
      case EnergyVariant::linear:
        if (cfg.lambda == 0.0) break;  // bit-exact zero-guidance equivalence
        for (std::size_t c = 0; c < d; ++c) out(r, c) = eps_hat(r, c) + cfg.lambda * g[c];
        break;
      case EnergyVariant::linear_unit:
        if (cfg.lambda == 0.0 || gnorm == 0.0) break;
        for (std::size_t c = 0; c < d; ++c) {
          out(r, c) = eps_hat(r, c) + cfg.lambda * g[c] / gnorm;
        }
        break;
      case EnergyVariant::linear_norm:
        if (cfg.lambda == 0.0 || gnorm == 0.0) break;
        for (std::size_t c = 0; c < d; ++c) {
          out(r, c) = eps_hat(r, c) + cfg.lambda * g[c] * enorm / gnorm;
        }
        break;
      case EnergyVariant::cvx:
        for (std::size_t c = 0; c < d; ++c) {
          out(r, c) = (1.0 - cfg.lambda) * eps_hat(r, c) + cfg.lambda * g[c];
        }
        break;
    }
  }
  if (!out.all_finite()) {
    throw std::runtime_error("energy guidance produced non-finite direction");
  }
  return out;
}

Tensor cfg_eps(const DenoiserWeights& w, const Tensor& x_t, double t,
               const ConditioningVector& cond, double lambda) {
  if (!w.arch.conditional) {
    throw std::invalid_argument("cfg_eps needs weights trained with conditioning dropout");
  }
  Tensor eps_cond = diffusion::denoiser_forward(w, x_t, t, cond);
  if (lambda == 0.0) return eps_cond;
  Tensor eps_uncond = diffusion::denoiser_forward(w, x_t, t, std::nullopt);
  Tensor out(x_t.rows(), x_t.cols());
  for (std::size_t k = 0; k < out.numel(); ++k) {
    out[k] = (1.0 + lambda) * eps_cond[k] - lambda * eps_uncond[k];
  }
  return out;
}

diffusion::DenoiseFn make_guided_denoise_fn(const DenoiserWeights& w,
                                            const energy::EnergyModel* energy,
                                            const GuidanceConfig& cfg) {
  cfg.validate();
  switch (cfg.mode) {
    case GuidanceMode::none:
      return diffusion::make_denoise_fn(w);
    case GuidanceMode::conditional:
      return [&w, cfg](const Tensor& x, double t) {
        return cfg_eps(w, x, t, cfg.cond, cfg.lambda);
      };
    case GuidanceMode::energy:
      if (!energy) throw std::invalid_argument("energy guidance needs an energy model");
      return [&w, energy, cfg](const Tensor& x, double t) {
        Tensor base = w.arch.conditional ? cfg_eps(w, x, t, cfg.cond, 0.0)
                                         : diffusion::denoiser_forward(w, x, t, std::nullopt);
        return energy_guided_eps(x, t, base, *energy, w, cfg);
      };
  }
  throw std::invalid_argument("unknown guidance mode");
}

}  // namespace invdes::guidance
