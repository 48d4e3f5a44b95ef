#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invdes/guidance.hpp"
#include "invdes/rng.hpp"
#include "invdes/sampler.hpp"

using namespace invdes;
using namespace invdes::diffusion;
using namespace invdes::guidance;

namespace {

// Tiny contain energy so gradient calls are fast.
energy::EnergyModel small_energy(int steps = 3) {
  sim::TaskSpec t = sim::make_task(sim::TaskId::contain);
  t.rollout_steps = steps;
  return energy::EnergyModel(t, {});
}

DenoiserWeights random_weights(bool conditional, int dim, std::uint64_t seed) {
  MlpArch arch;
  arch.design_dim = dim;
  arch.hidden = {16};
  arch.conditional = conditional;
  RngStream rng = RngStream::root(seed).sub("w");
  return DenoiserWeights::init(arch, NoiseSchedule{}, Standardizer::identity(dim), rng);
}

}  // namespace

TEST_CASE("config validation") {
  GuidanceConfig cfg;
  cfg.mode = GuidanceMode::energy;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lambda = 2.0;
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tau = 0.1;
  cfg.variant = EnergyVariant::cvx;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // cvx needs lambda in [0,1]
  cfg.lambda = 0.5;
  CHECK_NOTHROW(cfg.validate());
  CHECK(variant_from_name("linear-norm") == EnergyVariant::linear_norm);
  CHECK_THROWS_AS(variant_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("lambda zero leaves the denoising direction bit-identical") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 31);
  RngStream rng = RngStream::root(32).sub("x");
  ad::Tensor x = gaussian_rows(2, 16, rng);
  ad::Tensor eps = gaussian_rows(2, 16, rng);
  for (EnergyVariant v :
       {EnergyVariant::linear, EnergyVariant::linear_unit, EnergyVariant::linear_norm}) {
    GuidanceConfig cfg;
    cfg.mode = GuidanceMode::energy;
    cfg.lambda = 0.0;
    cfg.variant = v;
    ad::Tensor out = energy_guided_eps(x, 0.5, eps, e, w, cfg);
    for (std::size_t k = 0; k < eps.numel(); ++k) CHECK(out[k] == eps[k]);
  }
}

TEST_CASE("linear-unit arithmetic example") {
  // eps = (1,0), g proportional to (3,4), lambda = 0.5 -> eps + 0.5*(0.6,0.8)
  const double lambda = 0.5;
  const double gx = 3.0, gy = 4.0;
  const double norm = std::sqrt(gx * gx + gy * gy);
  const double ex = 1.0 + lambda * gx / norm;
  const double ey = 0.0 + lambda * gy / norm;
  CHECK(ex == doctest::Approx(1.3));
  CHECK(ey == doctest::Approx(0.4));
}

TEST_CASE("linear-norm moves by exactly lambda times the prediction norm") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 33);
  RngStream rng = RngStream::root(34).sub("x");
  ad::Tensor x = gaussian_rows(1, 16, rng);
  ad::Tensor eps = gaussian_rows(1, 16, rng);
  GuidanceConfig cfg;
  cfg.mode = GuidanceMode::energy;
  cfg.variant = EnergyVariant::linear_norm;
  cfg.lambda = 0.7;
  ad::Tensor out = energy_guided_eps(x, 0.4, eps, e, w, cfg);
  double diff = 0.0, enorm = 0.0;
  for (std::size_t k = 0; k < eps.numel(); ++k) {
    diff += (out[k] - eps[k]) * (out[k] - eps[k]);
    enorm += eps[k] * eps[k];
  }
  CHECK(std::sqrt(diff) == doctest::Approx(cfg.lambda * std::sqrt(enorm)).epsilon(1e-9));
  // and the guided norm is bounded by (1 + lambda) |eps|
  double onorm = 0.0;
  for (std::size_t k = 0; k < out.numel(); ++k) onorm += out[k] * out[k];
  CHECK(std::sqrt(onorm) <= (1.0 + cfg.lambda) * std::sqrt(enorm) + 1e-12);
}

TEST_CASE("energy-guided sampling calls the gradient exactly n_steps times per chain") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 35);
  GuidanceConfig cfg;
  cfg.mode = GuidanceMode::energy;
  cfg.lambda = 0.3;
  cfg.variant = EnergyVariant::linear_unit;
  DenoiseFn fn = make_guided_denoise_fn(w, &e, cfg);
  RngStream rng = RngStream::root(36).sub("x1");
  const int n_steps = 7;
  const std::size_t chains = 3;
  e.reset_evaluations();
  ode_sample(fn, n_steps, gaussian_rows(chains, 16, rng), w.schedule);
  CHECK(e.evaluations() == n_steps * chains);
}

TEST_CASE("zero-guidance ODE sampling is bit-identical to unguided") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 37);
  RngStream rng = RngStream::root(38).sub("x1");
  ad::Tensor x1 = gaussian_rows(2, 16, rng);

  GuidanceConfig cfg;
  cfg.mode = GuidanceMode::energy;
  cfg.lambda = 0.0;
  cfg.variant = EnergyVariant::linear;
  ad::Tensor guided = ode_sample(make_guided_denoise_fn(w, &e, cfg), 10, x1, w.schedule);
  ad::Tensor plain = ode_sample(make_denoise_fn(w), 10, x1, w.schedule);
  for (std::size_t k = 0; k < guided.numel(); ++k) CHECK(guided[k] == plain[k]);
  CHECK(e.evaluations() == 10 * 2);  // gradients still computed and counted
}

TEST_CASE("classifier-free arithmetic") {
  // lambda=1 with scalar doubles eps_cond=0.2, eps_uncond=0.1 -> 0.3
  const double lambda = 1.0;
  CHECK((1 + lambda) * 0.2 - lambda * 0.1 == doctest::Approx(0.3));
}

TEST_CASE("cfg_eps reduces to the conditional output at lambda zero") {
  DenoiserWeights w = random_weights(true, 4, 39);
  RngStream rng = RngStream::root(40).sub("x");
  ad::Tensor x = gaussian_rows(3, 4, rng);
  ConditioningVector cond{0.5, 0.2, 0.0};
  ad::Tensor a = cfg_eps(w, x, 0.6, cond, 0.0);
  ad::Tensor b = denoiser_forward(w, x, 0.6, cond);
  for (std::size_t k = 0; k < a.numel(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("a network that ignores conditioning cancels the guidance term") {
  // zero the first-layer rows that read the conditioning inputs
  DenoiserWeights w = random_weights(true, 4, 41);
  const std::size_t in_dim = static_cast<std::size_t>(w.arch.input_dim());
  ad::Tensor& W0 = w.params[0];
  for (std::size_t r = in_dim - 3; r < in_dim; ++r) {
    for (std::size_t c = 0; c < W0.cols(); ++c) W0(r, c) = 0.0;
  }
  RngStream rng = RngStream::root(42).sub("x");
  ad::Tensor x = gaussian_rows(2, 4, rng);
  ConditioningVector cond{0.7, 0.3, 0.5};
  for (double lambda : {0.0, 1.0, 5.0}) {
    ad::Tensor guided = cfg_eps(w, x, 0.5, cond, lambda);
    ad::Tensor uncond = denoiser_forward(w, x, 0.5, std::nullopt);
    for (std::size_t k = 0; k < guided.numel(); ++k) {
      CHECK(guided[k] == doctest::Approx(uncond[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("jacobian-through-denoiser guidance stays finite and differs from the cheap form") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 43);
  RngStream rng = RngStream::root(44).sub("x");
  ad::Tensor x = gaussian_rows(1, 16, rng);
  ad::Tensor eps = gaussian_rows(1, 16, rng);
  GuidanceConfig cheap;
  cheap.mode = GuidanceMode::energy;
  cheap.lambda = 1.0;
  cheap.variant = EnergyVariant::linear;
  GuidanceConfig full = cheap;
  full.jacobian_through_denoiser = true;
  ad::Tensor a = energy_guided_eps(x, 0.5, eps, e, w, cheap);
  ad::Tensor b = energy_guided_eps(x, 0.5, eps, e, w, full);
  CHECK(a.all_finite());
  CHECK(b.all_finite());
  double diff = 0.0;
  for (std::size_t k = 0; k < a.numel(); ++k) diff += std::abs(a[k] - b[k]);
  CHECK(diff > 0.0);
}

TEST_CASE("guidance never mutates the denoiser weights") {
  energy::EnergyModel e = small_energy();
  DenoiserWeights w = random_weights(false, 16, 45);
  std::vector<ad::Tensor> before = w.params;
  RngStream rng = RngStream::root(46).sub("x");
  GuidanceConfig cfg;
  cfg.mode = GuidanceMode::energy;
  cfg.lambda = 2.0;
  cfg.variant = EnergyVariant::linear_norm;
  ode_sample(make_guided_denoise_fn(w, &e, cfg), 5, gaussian_rows(1, 16, rng), w.schedule);
  for (std::size_t p = 0; p < w.params.size(); ++p) {
    for (std::size_t k = 0; k < w.params[p].numel(); ++k) {
      CHECK(w.params[p][k] == before[p][k]);
    }
  }
}
