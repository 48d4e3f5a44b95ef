#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invdes/rng.hpp"
#include "invdes/sampler.hpp"
#include "invdes/train.hpp"
#include "support/analytic.hpp"

using namespace invdes;
using namespace invdes::diffusion;

// The network models the diffusion of the standardized data, so the oracle
// comparisons run in that space: for Dirac data the standardized dataset is
// the origin and the analytic denoiser is z_t / sqrt(1 - alpha); for
// N(0,I) data fitting the standardizer is a near-identity and the analytic
// denoiser is sqrt(1 - alpha) z.

TEST_CASE("empty dataset is rejected") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train_denoiser(ad::Tensor(0, 2), nullptr, cfg, NoiseSchedule{}),
                  std::invalid_argument);
}

TEST_CASE("training on a Dirac dataset recovers the analytic denoiser") {
  NoiseSchedule s;
  const std::vector<double> mu = {1.0, -0.5};
  ad::Tensor data(256, 2);
  for (std::size_t r = 0; r < 256; ++r) {
    data(r, 0) = mu[0];
    data(r, 1) = mu[1];
  }
  TrainConfig cfg;
  cfg.steps = 2000;
  cfg.batch = 64;
  cfg.hidden = {64, 64};
  cfg.seed = 101;
  auto [w, log] = train_denoiser(data, nullptr, cfg, s);

  // training progressed: final-quarter mean loss below first-quarter mean
  double first = 0, last = 0;
  const std::size_t q = log.loss.size() / 4;
  for (std::size_t i = 0; i < q; ++i) first += log.loss[i];
  for (std::size_t i = log.loss.size() - q; i < log.loss.size(); ++i) last += log.loss[i];
  CHECK(last < first);
  CHECK(w.standardizer.mean[0] == doctest::Approx(mu[0]));

  // RMSE against the analytic denoiser on forward draws, t in [0.1, 0.9]
  RngStream rng = RngStream::root(55).sub("eval");
  double se = 0.0;
  std::size_t count = 0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double sn = std::sqrt(1.0 - s.alpha(t));
    ad::Tensor eps = gaussian_rows(200, 2, rng);
    ad::Tensor zt = ad::smul(eps, sn);  // forward draw of the standardized Dirac at 0
    ad::Tensor pred = denoiser_forward(w, zt, t, std::nullopt);
    for (std::size_t k = 0; k < zt.numel(); ++k) {
      const double want = zt[k] / sn;
      se += (pred[k] - want) * (pred[k] - want);
      ++count;
    }
  }
  CHECK(std::sqrt(se / count) <= 0.1);

  // every decoded sample lands near mu after destandardizing
  RngStream srng = RngStream::root(56).sub("x1");
  ad::Tensor x1 = gaussian_rows(64, 2, srng);
  ad::Tensor out = w.standardizer.destandardize(ode_sample(make_denoise_fn(w), 50, x1, s));
  for (std::size_t r = 0; r < out.rows(); ++r) {
    CHECK(std::abs(out(r, 0) - mu[0]) < 0.25);
    CHECK(std::abs(out(r, 1) - mu[1]) < 0.25);
  }
}

TEST_CASE("training on standard-normal data recovers the analytic score") {
  NoiseSchedule s;
  RngStream drng = RngStream::root(57).sub("data");
  ad::Tensor data = gaussian_rows(4096, 2, drng);
  TrainConfig cfg;
  cfg.steps = 2000;
  cfg.batch = 128;
  cfg.hidden = {64, 64};
  cfg.seed = 102;
  auto [w, log] = train_denoiser(data, nullptr, cfg, s);

  // RMSE against sqrt(1-alpha) z on the grid |z| <= 2
  double se = 0.0;
  std::size_t count = 0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double sn = std::sqrt(1.0 - s.alpha(t));
    for (double x = -2.0; x <= 2.0; x += 0.25) {
      for (double y = -2.0; y <= 2.0; y += 0.25) {
        ad::Tensor q(1, 2, {x, y});
        ad::Tensor pred = denoiser_forward(w, q, t, std::nullopt);
        se += (pred(0, 0) - sn * x) * (pred(0, 0) - sn * x) +
              (pred(0, 1) - sn * y) * (pred(0, 1) - sn * y);
        count += 2;
      }
    }
  }
  CHECK(std::sqrt(se / count) <= 0.1);
}
