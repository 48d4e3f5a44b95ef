#pragma once

#include <cstdint>
#include <vector>

#include "invdes/energy.hpp"
#include "invdes/rng.hpp"
#include "invdes/task.hpp"

namespace invdes::optim {

struct TracePoint {
  int iteration = 0;
  sim::Design design;
  double cost = 0.0;
};

// Every evaluated design in order, with timing and the energy budget used.
struct OptTrace {
  std::vector<TracePoint> points;
  double wall_seconds = 0.0;
  std::uint64_t energy_evals = 0;

  const TracePoint& best() const;
  double best_cost() const { return best().cost; }
};

// Gradient descent on E with Adam; the trace records every iterate
// including the init (steps+1 points, 1 gradient evaluation per step plus
// the initial scoring). Aborts with the partial trace attached to the
// exception message if a gradient goes non-finite.
OptTrace adam_design_opt(const sim::Design& init, energy::EnergyModel& energy, int steps,
                         double lr);

struct CemConfig {
  int population = 32;
  double elite_frac = 0.25;
  int iterations = 30;
  double cov_floor = 1e-4;  // diagonal covariance never drops below this
};

// Cross-entropy method with a diagonal Gaussian started at N(0, I); elites
// refit the mean and covariance each iteration. population x iterations
// evaluations, all recorded.
OptTrace cem_design_opt(const CemConfig& cfg, energy::EnergyModel& energy, RngStream& rng,
                        int threads = 1);

// Evaluation-run init: uniform angles in [-pi, pi) and shifts across the
// environment. Data-generation runs use the flat tool below the fluid.
sim::Design uniform_random_design(const sim::TaskSpec& task, RngStream& rng);
sim::Design flat_design(const sim::TaskSpec& task);

}  // namespace invdes::optim
