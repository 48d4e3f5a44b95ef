#pragma once

#include <cstddef>
#include <vector>

#include "invdes/task.hpp"
#include "invdes/tensor.hpp"

namespace invdes::sim {

// Calibration knobs for the analytic particle dynamics. dt is the substep
// timestep; dt * substeps is the advance per rollout step and stays fixed
// per task for reproducibility.
struct SimConfig {
  double dt = 0.01;
  int substeps = 4;
  double gravity = 1.0;            // magnitude, pointing down
  double radius_h = 0.03;          // interaction + contact radius
  double repulsion_k = 30.0;
  double contact_k = 1200.0;
  double smooth_w = 0.005;         // contact smoothing width
  double damping = 0.02;           // velocity damping per substep
  double wall_restitution = 0.2;   // soft normal-velocity damping at walls
  double particle_spacing = 0.0125;
  double clamp_w = 0.002;          // smooth clamp width for shifts / segment params
};

// Particle state plus the static segments (tool rows first, then obstacles
// and the four environment walls).
struct Scene {
  ad::Tensor pos;       // (N,2)
  ad::Tensor vel;       // (N,2)
  ad::Tensor segments;  // (S,4) rows [ax ay bx by]
  std::size_t tool_segment_count = 0;
};

// Regular-grid fill of the task's fluid boxes; particle count depends on
// the task and spacing only, never on the design.
ad::Tensor initial_particles(const TaskSpec& task, const SimConfig& cfg);
std::size_t particle_count(const TaskSpec& task, const SimConfig& cfg);

Scene build_scene(const Design& design, const TaskSpec& task, const SimConfig& cfg = {});

// Neighbor pairs within radius h, found via a uniform grid over detached
// positions. Deterministic: pairs are ordered by particle index.
struct PairList {
  std::vector<int> i, j;
  std::size_t size() const { return i.size(); }
};
PairList build_pairs(const ad::Tensor& pos, double h);

// Advances one rollout step (cfg.substeps symplectic-Euler substeps).
void step(Scene& scene, const SimConfig& cfg);

struct Rollout {
  Scene final_scene;
  std::vector<ad::Tensor> positions;  // per-step snapshots incl. initial, when recorded
};

Rollout rollout(const Scene& scene, const TaskSpec& task, const SimConfig& cfg,
                bool record_trajectory = false);

}  // namespace invdes::sim
