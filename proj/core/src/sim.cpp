#include <algorithm>
#include <cmath>

#include "invdes/sim.hpp"
#include "invdes/sim_physics.hpp"

namespace invdes::sim {

namespace {

// Cells span [-0.2, 1.2] so slightly out-of-bound particles still land in a
// valid cell; candidates beyond the radius are rejected by the exact test.
constexpr double kGridLo = -0.2;
constexpr double kGridHi = 1.2;

}  // namespace

PairList build_pairs(const ad::Tensor& pos, double h) {
  const std::size_t n = pos.rows();
  const int cells = std::max(1, static_cast<int>((kGridHi - kGridLo) / h));
  const double inv = cells / (kGridHi - kGridLo);
  auto cell_of = [&](double x) {
    return std::clamp(static_cast<int>((x - kGridLo) * inv), 0, cells - 1);
  };

  // counting sort into a flat grid; no per-cell allocations
  const std::size_t ncells = static_cast<std::size_t>(cells) * cells;
  std::vector<int> cx(n), cy(n), count(ncells + 1, 0);
  for (std::size_t p = 0; p < n; ++p) {
    cx[p] = cell_of(pos(p, 0));
    cy[p] = cell_of(pos(p, 1));
    ++count[static_cast<std::size_t>(cy[p]) * cells + cx[p] + 1];
  }
  for (std::size_t c = 1; c <= ncells; ++c) count[c] += count[c - 1];
  std::vector<int> order(n);
  {
    std::vector<int> cursor(count.begin(), count.end() - 1);
    for (std::size_t p = 0; p < n; ++p) {
      order[static_cast<std::size_t>(
          cursor[static_cast<std::size_t>(cy[p]) * cells + cx[p]]++)] = static_cast<int>(p);
    }
  }

  PairList out;
  const double h2 = h * h;
  for (std::size_t p = 0; p < n; ++p) {
    for (int dy = -1; dy <= 1; ++dy) {
      const int y = cy[p] + dy;
      if (y < 0 || y >= cells) continue;
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = cx[p] + dx;
        if (x < 0 || x >= cells) continue;
        const std::size_t c = static_cast<std::size_t>(y) * cells + x;
        for (int k = count[c]; k < count[c + 1]; ++k) {
          const int q = order[static_cast<std::size_t>(k)];
          if (q <= static_cast<int>(p)) continue;
          const double ddx = pos(p, 0) - pos(q, 0);
          const double ddy = pos(p, 1) - pos(q, 1);
          if (ddx * ddx + ddy * ddy < h2) {
            out.i.push_back(static_cast<int>(p));
            out.j.push_back(q);
          }
        }
      }
    }
  }
  return out;
}

void step(Scene& scene, const SimConfig& cfg) {
  PlainCtx ctx;
  SimState<PlainCtx> st{scene.pos, scene.vel};
  sim_step(ctx, st, scene.segments, cfg);
  scene.pos = std::move(st.pos);
  scene.vel = std::move(st.vel);
}

Rollout rollout(const Scene& scene, const TaskSpec& task, const SimConfig& cfg,
                bool record_trajectory) {
  Rollout out;
  out.final_scene = scene;
  PlainCtx ctx;
  SimState<PlainCtx> st{out.final_scene.pos, out.final_scene.vel};
  sim_rollout(ctx, st, out.final_scene.segments, task, cfg,
              record_trajectory ? &out.positions : nullptr);
  out.final_scene.pos = std::move(st.pos);
  out.final_scene.vel = std::move(st.vel);
  return out;
}

}  // namespace invdes::sim
