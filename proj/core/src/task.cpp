#include "invdes/task.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "invdes/config.hpp"

namespace invdes::sim {

const char* task_name(TaskId id) {
  switch (id) {
    case TaskId::contain: return "contain";
    case TaskId::contain_shift: return "contain-shift";
    case TaskId::ramp: return "ramp";
    case TaskId::obstacle: return "obstacle";
    case TaskId::bimodal: return "bimodal";
    case TaskId::multitool: return "multitool";
  }
  return "?";
}

TaskId task_from_name(const std::string& name) {
  for (TaskId id : {TaskId::contain, TaskId::contain_shift, TaskId::ramp, TaskId::obstacle,
                    TaskId::bimodal, TaskId::multitool}) {
    if (name == task_name(id)) return id;
  }
  throw std::invalid_argument("unknown task '" + name + "'");
}

int TaskSpec::design_dim() const {
  return tool_count * (angles_in_design() + (design_has_shift ? 2 : 0));
}

std::vector<std::array<double, 2>> TaskSpec::tool_anchors() const {
  std::vector<std::array<double, 2>> anchors;
  if (tool_count == 1) {
    anchors.push_back({0.5 * (anchor_x_lo + anchor_x_hi), anchor_y});
  } else {
    for (int i = 0; i < tool_count; ++i) {
      const double f = tool_count > 1 ? static_cast<double>(i) / (tool_count - 1) : 0.0;
      anchors.push_back({anchor_x_lo + f * (anchor_x_hi - anchor_x_lo), anchor_y});
    }
  }
  return anchors;
}

void TaskSpec::validate() const {
  auto box_ok = [&](const Box& b) {
    return b.left < b.right + 1e-12 && b.bottom < b.top + 1e-12 && b.left >= 0 &&
           b.right <= env_size && b.bottom >= 0 && b.top <= env_size;
  };
  for (const Box& b : fluid_boxes) {
    if (!box_ok(b)) throw std::invalid_argument("fluid box outside environment");
  }
  for (const Box& b : reward_boxes) {
    if (!box_ok(b)) throw std::invalid_argument("reward box outside environment");
  }
  if (rollout_steps < 0) throw std::invalid_argument("rollout length must be >= 0");
  if (tool_count < 1 || joints_per_tool < 1) {
    throw std::invalid_argument("need at least one tool joint");
  }
  if (goals.size() != reward_boxes.size()) {
    throw std::invalid_argument("need one goal per reward box");
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (!reward_boxes[i].contains(goals[i][0], goals[i][1])) {
      throw std::invalid_argument("goal lies outside its reward sampling box");
    }
  }
}

TaskSpec make_task(TaskId id) {
  TaskSpec t;
  t.id = id;
  switch (id) {
    case TaskId::contain:
    case TaskId::contain_shift:
      t.fluid_boxes = {{0.2, 0.3, 0.5, 0.6}};
      t.reward_boxes = {{0.4, 0.6, 0.1, 0.3}};
      t.reward_sigma = 0.1;
      t.tool_count = 1;
      t.joints_per_tool = 16;
      t.tool_length = 0.8;
      t.design_has_angles = true;
      t.design_has_shift = (id == TaskId::contain_shift);
      t.anchor_x_lo = 0.15;
      t.anchor_x_hi = 0.35;
      break;
    case TaskId::ramp:
      t.fluid_boxes = {{0.2, 0.3, 0.5, 0.6}};
      t.reward_boxes = {{0.8, 1.0, 0.0, 0.2}};
      t.reward_sigma = 0.1;
      t.tool_count = 1;
      t.joints_per_tool = 16;
      t.tool_length = 0.8;
      t.design_has_angles = true;
      t.design_has_shift = false;
      t.anchor_x_lo = 0.15;
      t.anchor_x_hi = 0.35;
      break;
    case TaskId::obstacle:
      t.fluid_boxes = {{0.45, 0.55, 0.5, 0.6}};
      t.reward_boxes = {{0.2, 0.2, 0.2, 0.2}};  // degenerate: fixed goal
      t.reward_sigma = 0.05;
      t.tool_count = 1;
      t.joints_per_tool = 16;
      t.tool_length = 0.6;
      t.design_has_angles = true;
      t.design_has_shift = true;
      t.anchor_x_lo = 0.25;
      t.anchor_x_hi = 0.35;
      // cup around the goal plus a vertical barrier halfway to the fluid
      t.obstacle_segments = {
          {0.14, 0.14, 0.26, 0.14},  // cup bottom
          {0.14, 0.14, 0.14, 0.26},  // cup left
          {0.26, 0.14, 0.26, 0.26},  // cup right
          {0.35, 0.0, 0.35, 0.35},   // barrier
      };
      break;
    case TaskId::bimodal:
      t.fluid_boxes = {{0.25, 0.35, 0.5, 0.6}, {0.65, 0.75, 0.5, 0.6}};
      t.reward_boxes = {{0.25, 0.35, 0.1, 0.2}, {0.65, 0.75, 0.1, 0.2}};
      t.reward_sigma = 0.1;
      t.tool_count = 1;
      t.joints_per_tool = 16;
      t.tool_length = 0.4;
      t.design_has_angles = true;
      t.design_has_shift = true;
      t.anchor_x_lo = 0.3;
      t.anchor_x_hi = 0.6;
      break;
    case TaskId::multitool:
      t.fluid_boxes = {{0.2, 0.3, 0.5, 0.6}};
      t.reward_boxes = {{0.2, 0.3, 0.2, 0.5}};
      t.reward_sigma = 0.1;
      t.tool_count = 16;
      t.joints_per_tool = 1;
      t.tool_length = 0.1;
      t.design_has_angles = false;  // plates; only shifts are optimized
      t.design_has_shift = true;
      t.anchor_x_lo = 0.175;
      t.anchor_x_hi = 0.375;
      break;
  }
  for (const Box& b : t.reward_boxes) {
    t.goals.push_back({0.5 * (b.left + b.right), 0.5 * (b.bottom + b.top)});
  }
  t.validate();
  return t;
}

namespace {

std::string fmt_reals(std::initializer_list<double> xs) {
  std::string out;
  char buf[32];
  for (double x : xs) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out += (out.empty() ? "" : " ") + std::string(buf);
  }
  return out;
}

}  // namespace

std::string task_to_text(const TaskSpec& t) {
  std::ostringstream os;
  os << "task = " << task_name(t.id) << "\n";
  os << "env_size = " << fmt_reals({t.env_size}) << "\n";
  os << "rollout_length = " << t.rollout_steps << "\n";
  for (std::size_t i = 0; i < t.fluid_boxes.size(); ++i) {
    const Box& b = t.fluid_boxes[i];
    os << "fluid_box_" << i << " = " << fmt_reals({b.left, b.right, b.bottom, b.top}) << "\n";
  }
  for (std::size_t i = 0; i < t.reward_boxes.size(); ++i) {
    const Box& b = t.reward_boxes[i];
    os << "reward_box_" << i << " = " << fmt_reals({b.left, b.right, b.bottom, b.top}) << "\n";
  }
  os << "reward_sigma = " << fmt_reals({t.reward_sigma}) << "\n";
  os << "tool_count = " << t.tool_count << "\n";
  os << "joints_per_tool = " << t.joints_per_tool << "\n";
  os << "tool_length = " << fmt_reals({t.tool_length}) << "\n";
  os << "design_angles = " << (t.design_has_angles ? "true" : "false") << "\n";
  os << "design_shift = " << (t.design_has_shift ? "true" : "false") << "\n";
  os << "anchor_x_lo = " << fmt_reals({t.anchor_x_lo}) << "\n";
  os << "anchor_x_hi = " << fmt_reals({t.anchor_x_hi}) << "\n";
  os << "anchor_y = " << fmt_reals({t.anchor_y}) << "\n";
  for (std::size_t i = 0; i < t.obstacle_segments.size(); ++i) {
    const auto& s = t.obstacle_segments[i];
    os << "obstacle_" << i << " = " << fmt_reals({s[0], s[1], s[2], s[3]}) << "\n";
  }
  for (std::size_t i = 0; i < t.goals.size(); ++i) {
    os << "goal_" << i << " = " << fmt_reals({t.goals[i][0], t.goals[i][1]}) << "\n";
  }
  return os.str();
}

TaskSpec task_from_text(const std::string& text) {
  ConfigMap cfg = ConfigMap::parse(text);
  TaskSpec t;
  t.id = task_from_name(cfg.get("task"));
  t.env_size = cfg.get_double_or("env_size", 1.0);
  t.rollout_steps = static_cast<int>(cfg.get_int_or("rollout_length", 150));
  auto read_boxes = [&](const std::string& prefix) {
    std::vector<Box> boxes;
    for (int i = 0;; ++i) {
      const std::string key = prefix + "_" + std::to_string(i);
      if (!cfg.has(key)) break;
      auto v = cfg.get_doubles(key);
      if (v.size() != 4) throw std::invalid_argument(key + " needs 4 reals");
      boxes.push_back({v[0], v[1], v[2], v[3]});
    }
    return boxes;
  };
  t.fluid_boxes = read_boxes("fluid_box");
  t.reward_boxes = read_boxes("reward_box");
  t.reward_sigma = cfg.get_double("reward_sigma");
  t.tool_count = static_cast<int>(cfg.get_int("tool_count"));
  t.joints_per_tool = static_cast<int>(cfg.get_int("joints_per_tool"));
  t.tool_length = cfg.get_double("tool_length");
  t.design_has_angles = cfg.get_bool_or("design_angles", true);
  t.design_has_shift = cfg.get_bool_or("design_shift", false);
  t.anchor_x_lo = cfg.get_double("anchor_x_lo");
  t.anchor_x_hi = cfg.get_double("anchor_x_hi");
  t.anchor_y = cfg.get_double_or("anchor_y", 0.4);
  for (int i = 0;; ++i) {
    const std::string key = "obstacle_" + std::to_string(i);
    if (!cfg.has(key)) break;
    auto v = cfg.get_doubles(key);
    if (v.size() != 4) throw std::invalid_argument(key + " needs 4 reals");
    t.obstacle_segments.push_back({v[0], v[1], v[2], v[3]});
  }
  for (int i = 0;; ++i) {
    const std::string key = "goal_" + std::to_string(i);
    if (!cfg.has(key)) break;
    auto v = cfg.get_doubles(key);
    if (v.size() != 2) throw std::invalid_argument(key + " needs 2 reals");
    t.goals.push_back({v[0], v[1]});
  }
  t.validate();
  return t;
}

}  // namespace invdes::sim
