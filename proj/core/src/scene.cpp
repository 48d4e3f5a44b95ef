#include <cmath>
#include <stdexcept>

#include "invdes/sim.hpp"
#include "invdes/sim_physics.hpp"

namespace invdes::sim {

namespace {

void grid_fill(const Box& box, double spacing, std::vector<double>& out) {
  const int nx = static_cast<int>(std::lround(box.width() / spacing));
  const int ny = static_cast<int>(std::lround(box.height() / spacing));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      out.push_back(box.left + (ix + 0.5) * spacing);
      out.push_back(box.bottom + (iy + 0.5) * spacing);
    }
  }
}

}  // namespace

ad::Tensor initial_particles(const TaskSpec& task, const SimConfig& cfg) {
  std::vector<double> xy;
  for (const Box& b : task.fluid_boxes) grid_fill(b, cfg.particle_spacing, xy);
  if (xy.empty()) throw std::invalid_argument("task has no fluid particles");
  const std::size_t n = xy.size() / 2;
  return ad::Tensor(n, 2, std::move(xy));
}

std::size_t particle_count(const TaskSpec& task, const SimConfig& cfg) {
  return initial_particles(task, cfg).rows();
}

Scene build_scene(const Design& design, const TaskSpec& task, const SimConfig& cfg) {
  if (static_cast<int>(design.size()) != task.design_dim()) {
    throw std::invalid_argument("design length " + std::to_string(design.size()) +
                                " does not match task '" + task_name(task.id) +
                                "' dimensionality " + std::to_string(task.design_dim()));
  }
  PlainCtx ctx;
  ad::Tensor dvec = ad::Tensor::column(design.params);
  Scene scene;
  scene.segments = build_segments(ctx, dvec, task, cfg);
  scene.tool_segment_count = static_cast<std::size_t>(task.tool_count * task.joints_per_tool);
  scene.pos = initial_particles(task, cfg);
  scene.vel = ad::Tensor(scene.pos.rows(), 2, 0.0);
  return scene;
}

}  // namespace invdes::sim
