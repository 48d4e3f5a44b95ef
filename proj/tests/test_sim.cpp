#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invdes/rng.hpp"
#include "invdes/sim.hpp"
#include "invdes/task.hpp"

using namespace invdes;
using namespace invdes::sim;

namespace {

Design zero_design(const TaskSpec& t) { return Design{std::vector<double>(t.design_dim(), 0.0)}; }

}  // namespace

TEST_CASE("task catalog matches the published parameters") {
  TaskSpec c = make_task(TaskId::contain);
  CHECK(c.rollout_steps == 150);
  CHECK(c.joints_per_tool == 16);
  CHECK(c.tool_length == 0.8);
  CHECK(c.design_dim() == 16);
  CHECK(c.fluid_boxes[0].left == 0.2);
  CHECK(c.reward_sigma == 0.1);

  CHECK(make_task(TaskId::contain_shift).design_dim() == 18);
  CHECK(make_task(TaskId::ramp).design_dim() == 16);
  CHECK(make_task(TaskId::obstacle).design_dim() == 18);
  CHECK(make_task(TaskId::bimodal).design_dim() == 18);
  CHECK(make_task(TaskId::multitool).design_dim() == 32);
  CHECK(make_task(TaskId::bimodal).goals.size() == 2);
  CHECK(make_task(TaskId::obstacle).reward_sigma == 0.05);
}

TEST_CASE("task spec round trips through its text form") {
  for (TaskId id : {TaskId::contain, TaskId::obstacle, TaskId::bimodal, TaskId::multitool}) {
    TaskSpec t = make_task(id);
    TaskSpec u = task_from_text(task_to_text(t));
    CHECK(u.id == t.id);
    CHECK(u.design_dim() == t.design_dim());
    CHECK(u.reward_sigma == t.reward_sigma);
    CHECK(u.goals == t.goals);
    CHECK(u.obstacle_segments == t.obstacle_segments);
    CHECK(u.fluid_boxes.size() == t.fluid_boxes.size());
  }
}

TEST_CASE("flat contain design renders a straight 16-segment chain") {
  TaskSpec t = make_task(TaskId::contain);
  Scene s = build_scene(zero_design(t), t);
  CHECK(s.tool_segment_count == 16);
  const auto& segs = s.segments;
  for (std::size_t k = 0; k < 16; ++k) {
    const double len = std::hypot(segs(k, 2) - segs(k, 0), segs(k, 3) - segs(k, 1));
    CHECK(len == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(segs(k, 1) == doctest::Approx(segs(k, 3)).epsilon(1e-12));  // horizontal
  }
  const double total = segs(15, 2) - segs(0, 0);
  CHECK(total == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("shift translates every tool vertex exactly") {
  TaskSpec t = make_task(TaskId::contain_shift);
  Design base = zero_design(t);
  Design shifted = base;
  shifted.params[16] = 0.1;
  shifted.params[17] = 0.2;
  Scene s0 = build_scene(base, t);
  Scene s1 = build_scene(shifted, t);
  for (std::size_t k = 0; k < s0.tool_segment_count; ++k) {
    CHECK(s1.segments(k, 0) - s0.segments(k, 0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(s1.segments(k, 1) - s0.segments(k, 1) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(s1.segments(k, 2) - s0.segments(k, 2) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(s1.segments(k, 3) - s0.segments(k, 3) == doctest::Approx(0.2).epsilon(1e-14));
  }
}

TEST_CASE("contain fluid box fills with an 8x8 grid") {
  TaskSpec t = make_task(TaskId::contain);
  SimConfig cfg;
  CHECK(particle_count(t, cfg) == 64);
  ad::Tensor p = initial_particles(t, cfg);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    CHECK(p(i, 0) > 0.2);
    CHECK(p(i, 0) < 0.3);
    CHECK(p(i, 1) > 0.5);
    CHECK(p(i, 1) < 0.6);
  }
  CHECK(particle_count(make_task(TaskId::bimodal), cfg) == 128);
}

TEST_CASE("design length mismatch raises") {
  TaskSpec t = make_task(TaskId::contain);
  CHECK_THROWS_AS(build_scene(Design{{1.0, 2.0}}, t), std::invalid_argument);
}

TEST_CASE("single particle with no forces stays put") {
  TaskSpec t = make_task(TaskId::contain);
  Scene s = build_scene(zero_design(t), t);
  // strip everything that could exert force: keep one particle mid-air,
  // no gravity, segments far away are fine since softplus decays
  s.pos = ad::Tensor(1, 2, {0.5, 0.8});
  s.vel = ad::Tensor(1, 2, 0.0);
  SimConfig cfg;
  cfg.gravity = 0.0;
  cfg.contact_k = 0.0;
  cfg.repulsion_k = 0.0;
  cfg.wall_restitution = 0.0;
  Scene before = s;
  step(s, cfg);
  CHECK(s.pos(0, 0) == before.pos(0, 0));
  CHECK(s.pos(0, 1) == before.pos(0, 1));
  CHECK(s.vel(0, 0) == 0.0);
  CHECK(s.vel(0, 1) == 0.0);
}

TEST_CASE("free fall follows the declared update recursion") {
  // v_n = -g*dt*sum_{k=1..n} (1-damping)^k, x updated with the new velocity
  TaskSpec t = make_task(TaskId::contain);
  Scene s = build_scene(zero_design(t), t);
  s.pos = ad::Tensor(1, 2, {0.5, 0.9});  // far from walls and tool
  s.vel = ad::Tensor(1, 2, 0.0);
  SimConfig cfg;
  cfg.contact_k = 0.0;
  cfg.repulsion_k = 0.0;
  cfg.wall_restitution = 0.0;
  cfg.substeps = 1;

  double v_expect = 0.0;
  double y_expect = 0.9;
  for (int n = 1; n <= 5; ++n) {
    step(s, cfg);
    v_expect = (1.0 - cfg.damping) * (v_expect - cfg.gravity * cfg.dt);
    y_expect += cfg.dt * v_expect;
    CHECK(s.vel(0, 1) == doctest::Approx(v_expect).epsilon(1e-14));
    CHECK(s.pos(0, 1) == doctest::Approx(y_expect).epsilon(1e-14));
  }
  // closed form: geometric sum
  double series = 0.0;
  for (int k = 1; k <= 5; ++k) series += std::pow(1.0 - cfg.damping, k);
  CHECK(s.vel(0, 1) == doctest::Approx(-cfg.gravity * cfg.dt * series).epsilon(1e-12));
}

TEST_CASE("mirror-symmetric scene stays mirror-symmetric") {
  // two particles and a symmetric tool about x = 0.5
  TaskSpec t = make_task(TaskId::contain);
  t.rollout_steps = 40;
  Scene s = build_scene(zero_design(t), t);
  s.segments = ad::Tensor(5, 4, 0.0);
  // symmetric V shape plus floor/walls; all coordinates exactly
  // representable so the mirrored scene is bit-exact
  double rows[5][4] = {{0.25, 0.3125, 0.5, 0.1875},
                       {0.5, 0.1875, 0.75, 0.3125},
                       {0.0, 0.0, 1.0, 0.0},
                       {0.0, 0.0, 0.0, 1.0},
                       {1.0, 0.0, 1.0, 1.0}};
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 4; ++c) s.segments(r, c) = rows[r][c];
  }
  s.tool_segment_count = 2;
  s.pos = ad::Tensor(2, 2, {0.4375, 0.7, 0.5625, 0.7});
  s.vel = ad::Tensor(2, 2, 0.0);

  SimConfig cfg;
  for (int n = 0; n < 40; ++n) step(s, cfg);
  // particle 1 must be the mirror of particle 0
  CHECK(std::abs((1.0 - s.pos(1, 0)) - s.pos(0, 0)) < 1e-9);
  CHECK(std::abs(s.pos(1, 1) - s.pos(0, 1)) < 1e-9);
  CHECK(std::abs(-s.vel(1, 0) - s.vel(0, 0)) < 1e-9);
}

TEST_CASE("zero-length rollout returns the initial state") {
  TaskSpec t = make_task(TaskId::contain);
  t.rollout_steps = 0;
  Scene s = build_scene(zero_design(t), t);
  Rollout r = rollout(s, t, {});
  for (std::size_t i = 0; i < s.pos.numel(); ++i) CHECK(r.final_scene.pos[i] == s.pos[i]);
}

TEST_CASE("rollouts are bit-identical across runs") {
  TaskSpec t = make_task(TaskId::contain);
  t.rollout_steps = 30;
  RngStream rng = RngStream::root(3).sub("design");
  Design d = zero_design(t);
  for (auto& p : d.params) p = rng.uniform(-1.0, 1.0);
  Scene s = build_scene(d, t);
  Rollout a = rollout(s, t, {});
  Rollout b = rollout(s, t, {});
  for (std::size_t i = 0; i < a.final_scene.pos.numel(); ++i) {
    CHECK(a.final_scene.pos[i] == b.final_scene.pos[i]);
    CHECK(a.final_scene.vel[i] == b.final_scene.vel[i]);
  }
}

TEST_CASE("flat tool under the fluid keeps particles above it") {
  TaskSpec t = make_task(TaskId::contain);
  t.anchor_x_lo = t.anchor_x_hi = 0.02;  // flat chain spans x in [0.02, 0.82]
  t.anchor_y = 0.45;
  Scene s = build_scene(zero_design(t), t);
  Rollout r = rollout(s, t, {});
  const double tool_y = 0.45 - 0.03;  // allow contact-radius standoff
  std::size_t above = 0;
  for (std::size_t i = 0; i < r.final_scene.pos.rows(); ++i) {
    if (r.final_scene.pos(i, 1) > tool_y) ++above;
  }
  CHECK(above >= r.final_scene.pos.rows() * 9 / 10);
}

TEST_CASE("particles stay inside the padded environment box for all tasks") {
  RngStream root = RngStream::root(11);
  for (TaskId id : {TaskId::contain, TaskId::contain_shift, TaskId::ramp, TaskId::obstacle,
                    TaskId::bimodal, TaskId::multitool}) {
    CAPTURE(task_name(id));
    TaskSpec t = make_task(id);
    RngStream rng = root.sub(task_name(id));
    Design d = zero_design(t);
    for (auto& p : d.params) p = rng.uniform(-1.0, 1.0);
    Rollout r = rollout(build_scene(d, t), t, {}, true);
    for (const auto& snap : r.positions) {
      for (std::size_t i = 0; i < snap.numel(); ++i) {
        CHECK(snap[i] >= -0.1);
        CHECK(snap[i] <= 1.1);
      }
    }
  }
}

TEST_CASE("neighbor pairs are exactly the within-radius pairs") {
  RngStream rng = RngStream::root(5).sub("pairs");
  ad::Tensor pos(40, 2);
  for (std::size_t i = 0; i < pos.numel(); ++i) pos[i] = rng.uniform(0.0, 1.0);
  const double h = 0.07;
  PairList pl = build_pairs(pos, h);
  // brute-force oracle
  std::size_t count = 0;
  for (std::size_t a = 0; a < 40; ++a) {
    for (std::size_t b = a + 1; b < 40; ++b) {
      const double dx = pos(a, 0) - pos(b, 0), dy = pos(a, 1) - pos(b, 1);
      if (dx * dx + dy * dy < h * h) ++count;
    }
  }
  CHECK(pl.size() == count);
  for (std::size_t k = 0; k < pl.size(); ++k) {
    const double dx = pos(pl.i[k], 0) - pos(pl.j[k], 0);
    const double dy = pos(pl.i[k], 1) - pos(pl.j[k], 1);
    CHECK(dx * dx + dy * dy < h * h);
    CHECK(pl.i[k] < pl.j[k]);
  }
}
