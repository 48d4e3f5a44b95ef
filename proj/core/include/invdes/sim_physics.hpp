#pragma once

// Templated physics shared by the plain forward path (Arr = Tensor) and the
// taped gradient path (Arr = Value). Both instantiations execute the same
// kernels in the same order, so the two paths agree numerically.

#include <stdexcept>
#include <vector>

#include "invdes/forces.hpp"
#include "invdes/sim.hpp"
#include "invdes/tape.hpp"
#include "invdes/task.hpp"
#include "invdes/tensor.hpp"

namespace invdes::sim {

struct PlainCtx {
  using Arr = ad::Tensor;
  Arr constant(ad::Tensor t) const { return t; }
  ad::Tensor plain(const Arr& a) const { return a; }
};

struct TapeCtx {
  ad::Tape* tape = nullptr;
  using Arr = ad::Value;
  Arr constant(ad::Tensor t) const { return tape->constant(std::move(t)); }
  ad::Tensor plain(const Arr& a) const { return tape->val(a); }
};

namespace detail {

inline ad::Tensor lower_triangular_ones(std::size_t n) {
  ad::Tensor m(n, n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c <= r; ++c) m(r, c) = 1.0;
  }
  return m;
}

// Static rows shared by every design: obstacles then the four walls.
inline ad::Tensor static_segment_rows(const TaskSpec& task) {
  std::vector<std::array<double, 4>> rows = task.obstacle_segments;
  const double e = task.env_size;
  rows.push_back({0, 0, e, 0});  // floor
  rows.push_back({0, e, e, e});  // ceiling
  rows.push_back({0, 0, 0, e});  // left wall
  rows.push_back({e, 0, e, e});  // right wall
  ad::Tensor out(rows.size(), 4);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) out(r, c) = rows[r][c];
  }
  return out;
}

}  // namespace detail

// Renders the articulated tools as segment rows (tool rows only). Joint
// angles are relative: segment k's absolute angle is the sum of joints
// 1..k. The root sits at the task anchor plus the (smoothly clamped) shift.
template <class Ctx>
typename Ctx::Arr build_tool_segments(Ctx& ctx, const typename Ctx::Arr& design,
                                      const TaskSpec& task, const SimConfig& cfg) {
  using Arr = typename Ctx::Arr;
  const int J = task.joints_per_tool;
  const int per_tool = task.angles_in_design() + (task.design_has_shift ? 2 : 0);
  const double seg_len = task.segment_length();
  const auto anchors = task.tool_anchors();
  const Arr ltri = ctx.constant(detail::lower_triangular_ones(static_cast<std::size_t>(J)));
  const Arr zero = ctx.constant(ad::Tensor::scalar(0.0));
  const Arr one = ctx.constant(ad::Tensor::scalar(task.env_size));

  Arr all_rows;
  for (int tool = 0; tool < task.tool_count; ++tool) {
    const std::size_t off = static_cast<std::size_t>(tool * per_tool);

    Arr theta;
    if (task.design_has_angles) {
      Arr angles = slice(design, off, off + static_cast<std::size_t>(J), 0, 1);
      theta = matmul(ltri, angles);
    } else {
      theta = ctx.constant(ad::Tensor(static_cast<std::size_t>(J), 1, 0.0));
    }

    Arr root_x = ctx.constant(ad::Tensor::scalar(anchors[tool][0]));
    Arr root_y = ctx.constant(ad::Tensor::scalar(anchors[tool][1]));
    if (task.design_has_shift) {
      const std::size_t s = off + static_cast<std::size_t>(task.angles_in_design());
      root_x = root_x + slice(design, s, s + 1, 0, 1);
      root_y = root_y + slice(design, s + 1, s + 2, 0, 1);
      root_x = smooth_min(smooth_max(root_x, zero, cfg.clamp_w), one, cfg.clamp_w);
      root_y = smooth_min(smooth_max(root_y, zero, cfg.clamp_w), one, cfg.clamp_w);
    }

    Arr cum_x = matmul(ltri, smul(cos_(theta), seg_len));  // (J,1)
    Arr cum_y = matmul(ltri, smul(sin_(theta), seg_len));
    Arr verts_x = concat_rows(root_x, add(root_x, cum_x));  // (J+1,1)
    Arr verts_y = concat_rows(root_y, add(root_y, cum_y));

    const auto Ju = static_cast<std::size_t>(J);
    Arr ax = slice(verts_x, 0, Ju, 0, 1);
    Arr ay = slice(verts_y, 0, Ju, 0, 1);
    Arr bx = slice(verts_x, 1, Ju + 1, 0, 1);
    Arr by = slice(verts_y, 1, Ju + 1, 0, 1);
    Arr rows = concat_cols(concat_cols(ax, ay), concat_cols(bx, by));  // (J,4)
    all_rows = tool == 0 ? rows : concat_rows(all_rows, rows);
  }
  return all_rows;
}

// Tool rows followed by the constant obstacle/wall rows.
template <class Ctx>
typename Ctx::Arr build_segments(Ctx& ctx, const typename Ctx::Arr& design,
                                 const TaskSpec& task, const SimConfig& cfg) {
  auto tool_rows = build_tool_segments(ctx, design, task, cfg);
  auto statics = ctx.constant(detail::static_segment_rows(task));
  return concat_rows(tool_rows, statics);
}

template <class Ctx>
struct SimState {
  typename Ctx::Arr pos, vel;  // (N,2)
};

// One symplectic-Euler substep. Force laws are smooth in the particle
// state: cubic-hinge pair repulsion (exactly zero at the neighbor radius),
// softplus penalty contact against every segment, signed-depth softplus
// wall penalties and a tanh-gated soft restitution on the wall-normal
// velocity. The discrete pair list comes from detached positions.
template <class Ctx>
void sim_substep(Ctx& ctx, SimState<Ctx>& st, const typename Ctx::Arr& segs,
                 const PairList& pairs, const SimConfig& cfg, std::size_t n) {
  using Arr = typename Ctx::Arr;
  const ContactParams cp{cfg.radius_h, cfg.smooth_w, cfg.contact_k, cfg.clamp_w};

  Arr force = ctx.constant([&] {
    ad::Tensor g(n, 2, 0.0);
    for (std::size_t r = 0; r < n; ++r) g(r, 1) = -cfg.gravity;
    return g;
  }());

  if (pairs.size() > 0) {
    force = add(force, pair_repulsion(st.pos, pairs.i, pairs.j, cfg.radius_h, cfg.repulsion_k));
  }
  force = add(force, contact_force(st.pos, segs, cp));
  // walls stiffer than the tool so nothing gets squeezed out of the box
  force = add(force, wall_force(st.pos, cfg.radius_h, cfg.smooth_w, 2.0 * cfg.contact_k));

  st.vel = smul(add(st.vel, smul(force, cfg.dt)), 1.0 - cfg.damping);
  if (cfg.wall_restitution > 0.0) {
    st.vel = wall_velocity_filter(st.pos, st.vel, cfg.radius_h, cfg.smooth_w,
                                  cfg.wall_restitution);
  }
  st.pos = add(st.pos, smul(st.vel, cfg.dt));
}

// One rollout step: rebuild the neighbor list once, then run the substeps.
template <class Ctx>
void sim_step(Ctx& ctx, SimState<Ctx>& st, const typename Ctx::Arr& segs,
              const SimConfig& cfg) {
  const ad::Tensor detached = ctx.plain(st.pos);
  const PairList pairs = build_pairs(detached, cfg.radius_h);
  for (int s = 0; s < cfg.substeps; ++s) {
    sim_substep(ctx, st, segs, pairs, cfg, detached.rows());
  }
}

template <class Ctx>
void sim_rollout(Ctx& ctx, SimState<Ctx>& st, const typename Ctx::Arr& segs,
                 const TaskSpec& task, const SimConfig& cfg,
                 std::vector<ad::Tensor>* record = nullptr) {
  if (record) record->push_back(ctx.plain(st.pos));
  for (int t = 0; t < task.rollout_steps; ++t) {
    try {
      sim_step(ctx, st, segs, cfg);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("rollout failed at step " + std::to_string(t) + ": " + e.what());
    }
    if (record) record->push_back(ctx.plain(st.pos));
  }
}

}  // namespace invdes::sim
