#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "invdes/rng.hpp"
#include "invdes/sampler.hpp"
#include "invdes/train.hpp"
#include "support/analytic.hpp"

using namespace invdes;
using namespace invdes::diffusion;
using testsupport::dirac_denoiser;
using testsupport::gaussian_denoiser;

TEST_CASE("perfect denoiser has zero dsm loss") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(4).sub("dsm");
  ad::Tensor x0(8, 3);
  for (std::size_t k = 0; k < x0.numel(); ++k) x0[k] = rng.normal();
  DsmBatch b = dsm_draw(x0, s, rng);
  CHECK(dsm_loss_from_prediction(b.eps, b.eps) == 0.0);
}

TEST_CASE("zero denoiser has expected loss equal to the dimension") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(4).sub("chi2");
  const std::size_t d = 3;
  ad::Tensor x0(10000, d, 0.0);
  DsmBatch b = dsm_draw(x0, s, rng);
  const double loss = dsm_loss_from_prediction(ad::Tensor(10000, d, 0.0), b.eps);
  CHECK(loss == doctest::Approx(static_cast<double>(d)).epsilon(0.05));
}

TEST_CASE("dsm loss is invariant to batch order") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(4).sub("perm");
  ad::Tensor x0(6, 2);
  for (std::size_t k = 0; k < x0.numel(); ++k) x0[k] = rng.normal();
  DsmBatch b = dsm_draw(x0, s, rng);
  ad::Tensor pred(6, 2);
  for (std::size_t k = 0; k < pred.numel(); ++k) pred[k] = rng.normal();
  const double base = dsm_loss_from_prediction(pred, b.eps);
  // reverse the rows of prediction and target together
  ad::Tensor pred_r(6, 2), eps_r(6, 2);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      pred_r(r, c) = pred(5 - r, c);
      eps_r(r, c) = b.eps(5 - r, c);
    }
  }
  CHECK(dsm_loss_from_prediction(pred_r, eps_r) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("dsm_loss gradients match finite differences on a tiny net") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(9).sub("w");
  MlpArch arch;
  arch.design_dim = 2;
  arch.hidden = {5};
  DenoiserWeights w = DenoiserWeights::init(arch, s, Standardizer::identity(2), rng);
  ad::Tensor x0(4, 2);
  for (std::size_t k = 0; k < x0.numel(); ++k) x0[k] = rng.normal();

  RngStream draw = RngStream::root(77).sub("draw");
  auto [loss, grads] = dsm_loss(w, x0, nullptr, draw);
  CHECK(loss > 0.0);
  // perturb one weight entry and re-evaluate with the identical draw
  const double h = 1e-6;
  for (std::size_t p : {std::size_t{0}, w.params.size() - 1}) {
    DenoiserWeights wp = w;
    wp.params[p][0] += h;
    RngStream d1 = RngStream::root(77).sub("draw");
    auto [lp, g1] = dsm_loss(wp, x0, nullptr, d1);
    DenoiserWeights wm = w;
    wm.params[p][0] -= h;
    RngStream d2 = RngStream::root(77).sub("draw");
    auto [lm, g2] = dsm_loss(wm, x0, nullptr, d2);
    const double fd = (lp - lm) / (2 * h);
    CHECK(grads[p][0] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("one ODE step from the Dirac denoiser lands exactly on mu") {
  NoiseSchedule s;
  std::vector<double> mu = {0.7, -1.3};
  auto fn = dirac_denoiser(mu, s);
  RngStream rng = RngStream::root(6).sub("x1");
  ad::Tensor x1 = gaussian_rows(5, 2, rng);
  ad::Tensor out1 = ode_sample(fn, 1, x1, s);
  ad::Tensor out50 = ode_sample(fn, 50, x1, s);
  ad::Tensor out200 = ode_sample(fn, 200, x1, s);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(out1(r, c) == doctest::Approx(mu[c]).epsilon(1e-9));
      // x-hat is exact in exact arithmetic; in doubles the step counts
      // agree to rounding error
      CHECK(std::abs(out50(r, c) - out200(r, c)) < 1e-12);
      CHECK(std::abs(out50(r, c) - mu[c]) < 1e-12);
    }
  }
}

TEST_CASE("ODE sampling from the analytic Gaussian denoiser preserves N(0,I)") {
  NoiseSchedule s;
  auto fn = gaussian_denoiser(s);
  RngStream rng = RngStream::root(15).sub("gauss");
  const std::size_t n = 10000;
  ad::Tensor x1 = gaussian_rows(n, 2, rng);
  ad::Tensor out = ode_sample(fn, 50, x1, s);
  double mean[2] = {0, 0};
  for (std::size_t r = 0; r < n; ++r) {
    for (int c = 0; c < 2; ++c) mean[c] += out(r, c);
  }
  for (int c = 0; c < 2; ++c) mean[c] /= n;
  double cov[3] = {0, 0, 0};  // xx, yy, xy
  for (std::size_t r = 0; r < n; ++r) {
    const double dx = out(r, 0) - mean[0], dy = out(r, 1) - mean[1];
    cov[0] += dx * dx;
    cov[1] += dy * dy;
    cov[2] += dx * dy;
  }
  for (double& v : cov) v /= n;
  CHECK(std::abs(mean[0]) <= 0.05);
  CHECK(std::abs(mean[1]) <= 0.05);
  CHECK(std::abs(cov[0] - 1.0) <= 0.1);
  CHECK(std::abs(cov[1] - 1.0) <= 0.1);
  CHECK(std::abs(cov[2]) <= 0.1);
}

TEST_CASE("ODE sampler is deterministic given the initial noise") {
  NoiseSchedule s;
  auto fn = gaussian_denoiser(s);
  RngStream rng = RngStream::root(16).sub("det");
  ad::Tensor x1 = gaussian_rows(3, 2, rng);
  ad::Tensor a = ode_sample(fn, 25, x1, s);
  ad::Tensor b = ode_sample(fn, 25, x1, s);
  for (std::size_t k = 0; k < a.numel(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("SDE sampling from the Dirac denoiser concentrates on mu") {
  NoiseSchedule s;
  std::vector<double> mu = {0.4, -0.9};
  auto fn = dirac_denoiser(mu, s);
  RngStream rng = RngStream::root(17).sub("sde");
  ad::Tensor out = sde_sample(fn, 100, 1000, 2, s, rng);
  double mean[2] = {0, 0};
  for (std::size_t r = 0; r < 1000; ++r) {
    for (int c = 0; c < 2; ++c) mean[c] += out(r, c);
  }
  for (int c = 0; c < 2; ++c) {
    mean[c] /= 1000;
    CHECK(std::abs(mean[c] - mu[c]) <= 0.05);
  }
}

TEST_CASE("zero-noise single SDE step reduces to the deterministic Euler update") {
  NoiseSchedule s;
  std::vector<double> mu = {1.0, 0.0};
  auto fn = dirac_denoiser(mu, s);
  RngStream rng = RngStream::root(18).sub("euler");
  ad::Tensor out = sde_sample(fn, 1, 4, 2, s, rng, /*zero_noise=*/true);
  // oracle: x0 = x1 + beta(1)*(x1 + 2*score), score = -eps/sqrt(1-alpha)
  RngStream rng2 = RngStream::root(18).sub("euler");
  ad::Tensor x1 = gaussian_rows(4, 2, rng2);
  ad::Tensor eps = fn(x1, 1.0);
  const double beta = s.beta(1.0);
  const double srt = std::sqrt(1.0 - s.alpha(1.0));
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double expect = x1(r, c) + beta * (x1(r, c) - 2.0 * eps(r, c) / srt);
      CHECK(out(r, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("SDE sampler is bit-identical under a fixed seed") {
  NoiseSchedule s;
  auto fn = gaussian_denoiser(s);
  RngStream r1 = RngStream::root(19).sub("fix");
  RngStream r2 = RngStream::root(19).sub("fix");
  ad::Tensor a = sde_sample(fn, 30, 5, 2, s, r1);
  ad::Tensor b = sde_sample(fn, 30, 5, 2, s, r2);
  for (std::size_t k = 0; k < a.numel(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("score/eps conversion round trips") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(20).sub("score");
  for (double t : {0.2, 0.7}) {
    const double srt = std::sqrt(1.0 - s.alpha(t));
    const double eps = rng.normal();
    const double score = -eps / srt;
    CHECK(-srt * score == doctest::Approx(eps).epsilon(1e-15));
  }
}

TEST_CASE("checkpoints round trip bit-exactly") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(21).sub("ckpt");
  MlpArch arch;
  arch.design_dim = 4;
  arch.hidden = {7, 5};
  arch.conditional = true;
  Standardizer st;
  st.mean = {0.1, -0.2, 0.3, 12.0};
  st.scale = {1.0, 2.0, 0.5, 3.0};
  DenoiserWeights w = DenoiserWeights::init(arch, s, st, rng);

  const std::string path = (std::filesystem::temp_directory_path() / "invdes_ckpt.bin").string();
  save_checkpoint(path, w);
  DenoiserWeights r = load_checkpoint(path);
  CHECK(r.arch.design_dim == 4);
  CHECK(r.arch.hidden == std::vector<int>{7, 5});
  CHECK(r.arch.conditional);
  CHECK(r.schedule.beta_max == w.schedule.beta_max);
  CHECK(r.standardizer.mean == st.mean);
  CHECK(r.standardizer.scale == st.scale);
  REQUIRE(r.params.size() == w.params.size());
  for (std::size_t p = 0; p < w.params.size(); ++p) {
    REQUIRE(r.params[p].same_shape(w.params[p]));
    for (std::size_t k = 0; k < w.params[p].numel(); ++k) {
      CHECK(r.params[p][k] == w.params[p][k]);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("conditional network with zeroed conditioning equals its unconditional branch") {
  NoiseSchedule s;
  RngStream rng = RngStream::root(22).sub("cond");
  MlpArch arch;
  arch.design_dim = 3;
  arch.hidden = {16};
  arch.conditional = true;
  DenoiserWeights w = DenoiserWeights::init(arch, s, Standardizer::identity(3), rng);
  ad::Tensor x = gaussian_rows(4, 3, rng);
  ad::Tensor zero_cond(4, 3, 0.0);
  ad::Tensor a = denoiser_forward(w, x, ad::Tensor(4, 1, 0.5), &zero_cond);
  ad::Tensor b = denoiser_forward(w, x, ad::Tensor(4, 1, 0.5), nullptr);
  for (std::size_t k = 0; k < a.numel(); ++k) CHECK(a[k] == b[k]);
}
