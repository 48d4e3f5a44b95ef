#pragma once

#include <array>
#include <string>
#include <vector>

namespace invdes::sim {

enum class TaskId { contain, contain_shift, ramp, obstacle, bimodal, multitool };

const char* task_name(TaskId id);
TaskId task_from_name(const std::string& name);

struct Box {
  double left = 0, right = 0, bottom = 0, top = 0;
  double width() const { return right - left; }
  double height() const { return top - bottom; }
  bool contains(double x, double y) const {
    return x >= left && x <= right && y >= bottom && y <= top;
  }
};

// Flat design vector. Layout per tool: joint angles (radians, when the task
// optimizes them) followed by [shift_x, shift_y] when the task has shifts.
struct Design {
  std::vector<double> params;
  std::size_t size() const { return params.size(); }
};

// One environment row: geometry, fluid sources, reward region and goals.
struct TaskSpec {
  TaskId id = TaskId::contain;
  double env_size = 1.0;
  int rollout_steps = 150;
  std::vector<Box> fluid_boxes;
  std::vector<Box> reward_boxes;
  double reward_sigma = 0.1;
  int tool_count = 1;
  int joints_per_tool = 16;
  double tool_length = 0.8;  // total per tool
  bool design_has_angles = true;
  bool design_has_shift = false;
  double anchor_x_lo = 0.15, anchor_x_hi = 0.35;
  double anchor_y = 0.4;
  std::vector<std::array<double, 4>> obstacle_segments;   // ax ay bx by
  std::vector<std::array<double, 2>> goals;               // one per reward box

  int design_dim() const;
  int angles_in_design() const { return design_has_angles ? joints_per_tool : 0; }
  double segment_length() const { return tool_length / joints_per_tool; }
  // Fixed per-tool root positions (midpoint of the anchor range; evenly
  // spaced when there are several tools).
  std::vector<std::array<double, 2>> tool_anchors() const;

  void validate() const;  // throws on inconsistent geometry
};

// Catalog of the built-in tasks with default goals at reward-box centers.
TaskSpec make_task(TaskId id);

// Plain-text round trip (key = value).
std::string task_to_text(const TaskSpec& task);
TaskSpec task_from_text(const std::string& text);

}  // namespace invdes::sim
