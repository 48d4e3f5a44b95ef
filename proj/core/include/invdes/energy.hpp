#pragma once

#include <atomic>
#include <cstdint>
#include <utility>
#include <vector>

#include "invdes/sim.hpp"
#include "invdes/task.hpp"
#include "invdes/tensor.hpp"

namespace invdes::energy {

// RBF score of final particle positions: cost = -(1/|P|) * sum_p
// exp(-dist(p, nearest goal)/sigma). Always in [-1, 0); lower is better.
double rbf_cost(const ad::Tensor& final_pos, const sim::TaskSpec& task);

// Task cost E(design): build the scene, roll it out, score the last state.
// Every evaluation (value or gradient) bumps the shared counter; that
// counter is the budget axis for all optimizer comparisons.
class EnergyModel {
 public:
  // Convention marker: RBF sum negated and normalized by particle count.
  static constexpr const char* kConvention = "negated-mean-rbf";

  EnergyModel(sim::TaskSpec task, sim::SimConfig cfg = {});

  double evaluate_cost(const sim::Design& design) const;

  // Exact reverse-mode gradient through build_scene, rollout and the RBF.
  // Returns {cost, gradient}; counts as one evaluation.
  std::pair<double, std::vector<double>> cost_gradient(const sim::Design& design) const;

  std::uint64_t evaluations() const { return count_.load(); }
  void reset_evaluations() { count_.store(0); }

  const sim::TaskSpec& task() const { return task_; }
  const sim::SimConfig& sim_config() const { return cfg_; }

 private:
  sim::TaskSpec task_;
  sim::SimConfig cfg_;
  mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace invdes::energy
