#include "invdes/particle_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invdes/parallel.hpp"

namespace invdes::psearch {

using ad::Tensor;

ad::Tensor quick_decode(const diffusion::DenoiseFn& fn, const Tensor& x1, int m_steps,
                        const diffusion::NoiseSchedule& sched) {
  if (m_steps < 1) throw std::invalid_argument("quick_decode needs m_steps >= 1");
  return diffusion::ode_sample(fn, m_steps, x1, sched);
}

std::uint64_t predicted_evaluations(const ParticleSearchConfig& cfg) {
  const std::uint64_t n = static_cast<std::uint64_t>(cfg.n_particles);
  const std::uint64_t decodes = cfg.rounds == 0 ? n : n << cfg.rounds;  // N * 2^K
  return decodes + static_cast<std::uint64_t>(cfg.redecode_top);
}

namespace {

std::vector<double> boltzmann_weights(const std::vector<double>& costs, double tau) {
  double best = costs[0];
  for (double c : costs) best = std::min(best, c);
  std::vector<double> w(costs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-(costs[i] - best) / tau);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

// Decode a list of base rows and score each; energy evaluations parallelize
// across the batch.
void decode_and_score(energy::EnergyModel& energy, const diffusion::DenoiseFn& fn,
                      const diffusion::DenoiserWeights& w, const std::vector<Tensor>& points,
                      int m_steps, int threads, std::vector<sim::Design>& designs_out,
                      std::vector<double>& costs_out) {
  const std::size_t B = points.size();
  const std::size_t d = points[0].cols();
  Tensor batch(B, d);
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t c = 0; c < d; ++c) batch(r, c) = points[r](0, c);
  }
  Tensor decoded = quick_decode(fn, batch, m_steps, w.schedule);

  const std::size_t base = designs_out.size();
  designs_out.resize(base + B);
  costs_out.resize(base + B);
  for (std::size_t r = 0; r < B; ++r) {
    std::vector<double> row(d);
    for (std::size_t c = 0; c < d; ++c) row[c] = decoded(r, c);
    designs_out[base + r] = sim::Design{w.standardizer.destandardize(row)};
  }
  parallel_for(B, threads, [&](std::size_t r) {
    costs_out[base + r] = energy.evaluate_cost(designs_out[base + r]);
  });
}

}  // namespace

ParticleSearchResult particle_search(energy::EnergyModel& energy,
                                     const diffusion::DenoiserWeights& weights,
                                     const guidance::GuidanceConfig& guide,
                                     const ParticleSearchConfig& cfg, RngStream& rng,
                                     int threads) {
  if (cfg.n_particles < 1) throw std::invalid_argument("particle_search needs N >= 1");
  if (cfg.rounds < 0) throw std::invalid_argument("particle_search needs K >= 0");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("particle_search needs tau > 0");
  if (cfg.sigma_noise < 0.0) throw std::invalid_argument("sigma_noise must be >= 0");

  const diffusion::DenoiseFn fn = guidance::make_guided_denoise_fn(weights, &energy, guide);
  const std::size_t d = static_cast<std::size_t>(weights.arch.design_dim);

  ParticleSearchResult res;
  ParticleEnsemble& ens = res.ensemble;

  // current round's base points, initialized i.i.d. from N(0, I)
  std::vector<Tensor> current;
  {
    RngStream init = rng.sub("init");
    for (int i = 0; i < cfg.n_particles; ++i) {
      current.push_back(diffusion::gaussian_rows(1, d, init));
    }
  }

  for (int k = 0; k <= cfg.rounds; ++k) {
    for (const Tensor& p : current) ens.s1.push_back(p);
    decode_and_score(energy, fn, weights, current, cfg.decode_steps, threads, ens.s0,
                     ens.costs);
    res.decode_evals += current.size();
    ens.weights = boltzmann_weights(ens.costs, cfg.tau);
    ens.rounds_run = k + 1;
    if (k == cfg.rounds) break;

    // resample |S1| atoms from the cumulative weighted set, then perturb
    const std::size_t m = ens.s1.size();
    RngStream rs = rng.sub("resample", static_cast<std::uint64_t>(k));
    std::vector<std::size_t> picks(m);
    if (cfg.systematic_resampling) {
      const double u0 = rs.uniform();
      double cum = ens.weights[0];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const double u = (u0 + static_cast<double>(i)) / static_cast<double>(m);
        while (u > cum && idx + 1 < m) cum += ens.weights[++idx];
        picks[i] = idx;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        const double u = rs.uniform();
        double cum = 0.0;
        std::size_t idx = m - 1;
        for (std::size_t j = 0; j < m; ++j) {
          cum += ens.weights[j];
          if (u <= cum) {
            idx = j;
            break;
          }
        }
        picks[i] = idx;
      }
    }
    RngStream pert = rng.sub("perturb", static_cast<std::uint64_t>(k));
    current.clear();
    for (std::size_t i = 0; i < m; ++i) {
      Tensor p = ens.s1[picks[i]];
      for (std::size_t c = 0; c < d; ++c) p(0, c) += cfg.sigma_noise * pert.normal();
      current.push_back(std::move(p));
    }
  }

  // full-step re-decode of the best quick-decode candidates
  if (cfg.redecode_top > 0) {
    std::vector<std::size_t> order(ens.costs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ens.costs[a] < ens.costs[b]; });
    const std::size_t top = std::min<std::size_t>(cfg.redecode_top, order.size());
    std::vector<Tensor> finalists;
    for (std::size_t i = 0; i < top; ++i) finalists.push_back(ens.s1[order[i]]);
    decode_and_score(energy, fn, weights, finalists, cfg.redecode_steps, threads, ens.s0,
                     ens.costs);
    for (std::size_t i = 0; i < top; ++i) ens.s1.push_back(finalists[i]);
    res.redecode_evals += top;
    ens.weights = boltzmann_weights(ens.costs, cfg.tau);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < ens.costs.size(); ++i) {
    if (ens.costs[i] < ens.costs[best]) best = i;
  }
  res.best = ens.s0[best];
  res.best_cost = ens.costs[best];
  if (!std::isfinite(res.best_cost)) {
    throw std::runtime_error("particle_search: no finite-cost design found");
  }
  return res;
}

ParticleSearchResult best_of_iid(energy::EnergyModel& energy,
                                 const diffusion::DenoiserWeights& weights,
                                 const guidance::GuidanceConfig& guide, std::size_t budget,
                                 int m_steps, RngStream& rng, int threads) {
  if (budget < 1) throw std::invalid_argument("best_of_iid needs a positive budget");
  const diffusion::DenoiseFn fn = guidance::make_guided_denoise_fn(weights, &energy, guide);
  const std::size_t d = static_cast<std::size_t>(weights.arch.design_dim);

  ParticleSearchResult res;
  RngStream init = rng.sub("init");
  std::vector<Tensor> points;
  for (std::size_t i = 0; i < budget; ++i) points.push_back(diffusion::gaussian_rows(1, d, init));
  decode_and_score(energy, fn, weights, points, m_steps, threads, res.ensemble.s0,
                   res.ensemble.costs);
  res.ensemble.s1 = std::move(points);
  res.decode_evals = budget;

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.ensemble.costs.size(); ++i) {
    if (res.ensemble.costs[i] < res.ensemble.costs[best]) best = i;
  }
  res.best = res.ensemble.s0[best];
  res.best_cost = res.ensemble.costs[best];
  return res;
}

}  // namespace invdes::psearch
