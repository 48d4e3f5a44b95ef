#pragma once

#include <cstdint>
#include <vector>

#include "invdes/energy.hpp"
#include "invdes/guidance.hpp"
#include "invdes/sampler.hpp"

namespace invdes::psearch {

struct ParticleSearchConfig {
  int n_particles = 16;     // N
  int rounds = 3;           // K
  double tau = 0.1;         // Boltzmann temperature of the importance weights
  double sigma_noise = 0.25;
  int decode_steps = 1;     // reverse-ODE steps of the cheap decode
  int redecode_top = 4;     // candidates re-decoded with the full sampler
  int redecode_steps = 50;
  bool systematic_resampling = false;  // default is i.i.d. multinomial
};

// Paired base-space points and decoded designs, with costs and the final
// normalized weights. The sets are cumulative across rounds.
struct ParticleEnsemble {
  std::vector<ad::Tensor> s1;        // base-space points, each (1,d) standardized
  std::vector<sim::Design> s0;       // decoded designs (raw space)
  std::vector<double> costs;         // E per decoded design
  std::vector<double> weights;       // normalized, sum to 1
  int rounds_run = 0;
};

struct ParticleSearchResult {
  sim::Design best;
  double best_cost = 0.0;
  ParticleEnsemble ensemble;
  std::uint64_t decode_evals = 0;    // cheap-decode cost evaluations
  std::uint64_t redecode_evals = 0;  // full re-decode evaluations
};

// Cheap few-step decode of a batch of base points (rows of x1) into raw
// designs, scored lazily by the caller.
ad::Tensor quick_decode(const diffusion::DenoiseFn& fn, const ad::Tensor& x1, int m_steps,
                        const diffusion::NoiseSchedule& sched);

// Iteratively re-weights, resamples and perturbs the t=1 base points using
// cheap decodes scored by E; the sample sets are cumulative, so round k
// resamples |S1| = N 2^(k-1) points and the total decode count for K >= 1
// rounds of growth is N 2^K.
ParticleSearchResult particle_search(energy::EnergyModel& energy,
                                     const diffusion::DenoiserWeights& weights,
                                     const guidance::GuidanceConfig& guide,
                                     const ParticleSearchConfig& cfg, RngStream& rng,
                                     int threads = 1);

// Matched-budget baseline: best of `budget` i.i.d. Gaussian-base decodes.
ParticleSearchResult best_of_iid(energy::EnergyModel& energy,
                                 const diffusion::DenoiserWeights& weights,
                                 const guidance::GuidanceConfig& guide, std::size_t budget,
                                 int m_steps, RngStream& rng, int threads = 1);

// Expected evaluation count of particle_search for the audit.
std::uint64_t predicted_evaluations(const ParticleSearchConfig& cfg);

}  // namespace invdes::psearch
