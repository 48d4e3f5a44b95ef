#include "invdes/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invdes/adam.hpp"
#include "invdes/parallel.hpp"

namespace invdes::optim {

using Clock = std::chrono::steady_clock;

const TracePoint& OptTrace::best() const {
  if (points.empty()) throw std::logic_error("empty optimization trace");
  std::size_t b = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].cost < points[b].cost) b = i;
  }
  return points[b];
}

OptTrace adam_design_opt(const sim::Design& init, energy::EnergyModel& energy, int steps,
                         double lr) {
  if (steps < 1) throw std::invalid_argument("adam_design_opt needs steps >= 1");
  const auto t0 = Clock::now();
  const std::uint64_t evals0 = energy.evaluations();

  OptTrace trace;
  sim::Design x = init;
  trace.points.push_back({0, x, energy.evaluate_cost(x)});

  const std::size_t d = x.size();
  ad::Tensor params = ad::Tensor::column(x.params);
  ad::AdamState state = ad::AdamState::init(d, 1, ad::AdamConfig{.lr = lr});

  for (int it = 1; it <= steps; ++it) {
    try {
      auto [cost, grad] = energy.cost_gradient(sim::Design{params.to_vector()});
      ad::adam_step(params, ad::Tensor::column(grad), state, "design");
      trace.points.push_back({it, sim::Design{params.to_vector()}, cost});
    } catch (const std::runtime_error& e) {
      trace.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      trace.energy_evals = energy.evaluations() - evals0;
      throw std::runtime_error("adam_design_opt aborted at step " + std::to_string(it) + " (" +
                               std::to_string(trace.points.size()) + " trace points): " +
                               e.what());
    }
  }
  trace.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  trace.energy_evals = energy.evaluations() - evals0;
  return trace;
}

OptTrace cem_design_opt(const CemConfig& cfg, energy::EnergyModel& energy, RngStream& rng,
                        int threads) {
  if (cfg.population < 2) throw std::invalid_argument("cem needs population >= 2");
  const int n_elite = std::max(1, static_cast<int>(cfg.population * cfg.elite_frac));
  if (!(cfg.elite_frac > 0.0 && cfg.elite_frac <= 1.0)) {
    throw std::invalid_argument("elite fraction must be in (0, 1]");
  }
  const auto t0 = Clock::now();
  const std::uint64_t evals0 = energy.evaluations();

  const std::size_t d = static_cast<std::size_t>(energy.task().design_dim());
  std::vector<double> mean(d, 0.0), var(d, 1.0);

  OptTrace trace;
  for (int it = 0; it < cfg.iterations; ++it) {
    RngStream draw = rng.sub("population", static_cast<std::uint64_t>(it));
    std::vector<sim::Design> pop(static_cast<std::size_t>(cfg.population));
    for (auto& member : pop) {
      member.params.resize(d);
      for (std::size_t c = 0; c < d; ++c) {
        member.params[c] = mean[c] + std::sqrt(var[c]) * draw.normal();
      }
    }
    std::vector<double> costs(pop.size());
    parallel_for(pop.size(), threads,
                 [&](std::size_t i) { costs[i] = energy.evaluate_cost(pop[i]); });
    for (std::size_t i = 0; i < pop.size(); ++i) {
      trace.points.push_back({it, pop[i], costs[i]});
    }

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

    std::vector<double> new_mean(d, 0.0), new_var(d, 0.0);
    for (int e = 0; e < n_elite; ++e) {
      for (std::size_t c = 0; c < d; ++c) new_mean[c] += pop[order[e]].params[c];
    }
    for (double& m : new_mean) m /= n_elite;
    for (int e = 0; e < n_elite; ++e) {
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = pop[order[e]].params[c] - new_mean[c];
        new_var[c] += dv * dv;
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] = new_mean[c];
      var[c] = std::max(new_var[c] / n_elite, cfg.cov_floor);
    }
  }
  trace.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  trace.energy_evals = energy.evaluations() - evals0;
  return trace;
}

sim::Design uniform_random_design(const sim::TaskSpec& task, RngStream& rng) {
  sim::Design d;
  d.params.reserve(task.design_dim());
  for (int tool = 0; tool < task.tool_count; ++tool) {
    for (int a = 0; a < task.angles_in_design(); ++a) {
      d.params.push_back(rng.uniform(-M_PI, M_PI));
    }
    if (task.design_has_shift) {
      d.params.push_back(rng.uniform(0.0, task.env_size) - 0.5 * task.env_size);
      d.params.push_back(rng.uniform(0.0, task.env_size) - 0.5 * task.env_size);
    }
  }
  return d;
}

sim::Design flat_design(const sim::TaskSpec& task) {
  return sim::Design{std::vector<double>(static_cast<std::size_t>(task.design_dim()), 0.0)};
}

}  // namespace invdes::optim
