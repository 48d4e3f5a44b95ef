#include "invdes/energy.hpp"

#include <stdexcept>

#include "invdes/sim_physics.hpp"
#include "invdes/tape.hpp"

namespace invdes::energy {

namespace {

// Score shared by the plain and taped paths: per particle, the RBF of the
// distance to the nearest goal.
template <class Ctx>
typename Ctx::Arr rbf_cost_t(Ctx& ctx, const typename Ctx::Arr& pos, const sim::TaskSpec& task) {
  using Arr = typename Ctx::Arr;
  Arr score;
  for (std::size_t g = 0; g < task.goals.size(); ++g) {
    Arr goal = ctx.constant(ad::Tensor::row({task.goals[g][0], task.goals[g][1]}));
    Arr d = row_norm(sub(pos, goal));  // (N,1)
    Arr s = exp_(smul(d, -1.0 / task.reward_sigma));
    score = g == 0 ? s : emax(score, s);  // nearer goal wins
  }
  return neg(mean_all(score));
}

}  // namespace

double rbf_cost(const ad::Tensor& final_pos, const sim::TaskSpec& task) {
  sim::PlainCtx ctx;
  return rbf_cost_t(ctx, final_pos, task).scalar_value();
}

EnergyModel::EnergyModel(sim::TaskSpec task, sim::SimConfig cfg)
    : task_(std::move(task)), cfg_(cfg) {
  task_.validate();
}

double EnergyModel::evaluate_cost(const sim::Design& design) const {
  count_.fetch_add(1, std::memory_order_relaxed);
  sim::Scene scene = sim::build_scene(design, task_, cfg_);
  sim::Rollout r = sim::rollout(scene, task_, cfg_);
  return rbf_cost(r.final_scene.pos, task_);
}

std::pair<double, std::vector<double>> EnergyModel::cost_gradient(const sim::Design& design) const {
  count_.fetch_add(1, std::memory_order_relaxed);
  if (static_cast<int>(design.size()) != task_.design_dim()) {
    throw std::invalid_argument("design length does not match task dimensionality");
  }

  ad::Tape tape;
  sim::TapeCtx ctx{&tape};
  ad::Value dvec = tape.input(ad::Tensor::column(design.params));
  ad::Value segs = sim::build_segments(ctx, dvec, task_, cfg_);
  sim::SimState<sim::TapeCtx> st{ctx.constant(sim::initial_particles(task_, cfg_)),
                                 ctx.constant(ad::Tensor(sim::particle_count(task_, cfg_), 2, 0.0))};
  sim::sim_rollout(ctx, st, segs, task_, cfg_);
  ad::Value cost = rbf_cost_t(ctx, st.pos, task_);

  const double value = tape.val(cost).scalar_value();
  auto grads = tape.backward(cost, {&dvec, 1});
  if (!grads[0].all_finite()) {
    throw std::runtime_error("cost_gradient produced a non-finite gradient");
  }
  return {value, grads[0].to_vector()};
}

}  // namespace invdes::energy
