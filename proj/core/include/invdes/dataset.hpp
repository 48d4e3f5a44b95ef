#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "invdes/energy.hpp"
#include "invdes/optimizers.hpp"
#include "invdes/rng.hpp"
#include "invdes/task.hpp"
#include "invdes/tensor.hpp"

namespace invdes::data {

enum class OptimizerKind { cem, adam, both };
OptimizerKind optimizer_from_name(const std::string& name);
const char* optimizer_name(OptimizerKind k);

struct DesignRecord {
  std::vector<double> design;
  double cost = 0.0;
  sim::TaskId task = sim::TaskId::contain;
  std::array<double, 2> goal{};
  double percentile = 0.0;  // within the task-restricted dataset, best = 0
  std::string source;       // "cem" or "adam"
  int run_id = 0;
  int iteration = 0;
};

struct Dataset {
  std::vector<DesignRecord> records;

  std::size_t size() const { return records.size(); }
  ad::Tensor design_matrix() const;
  ad::Tensor conditioning_matrix() const;  // (M,3): goal_x, goal_y, percentile
};

struct CollectConfig {
  OptimizerKind optimizer = OptimizerKind::both;
  int runs_per_task = 8;  // per optimizer when both
  optim::CemConfig cem{};
  int adam_steps = 300;
  double adam_lr = 0.05;
  sim::SimConfig sim{};
  int threads = 1;
};

// Runs the optimizers from the flat-tool init on freshly sampled goals and
// appends every iterate; percentiles are recomputed at the end. Failed runs
// are skipped (logged to stderr), not fatal.
Dataset collect_dataset(const std::vector<sim::TaskSpec>& tasks, const CollectConfig& cfg,
                        RngStream& rng);

// Keeps records with cost strictly below the cutoff; recomputes
// percentiles. Throws if nothing survives.
Dataset filter_by_cutoff(const Dataset& ds, double cutoff);

// Percentile = rank / (count - 1) per task id, ties share the average rank.
void percentile_rank(Dataset& ds);

// Task-id selection for the matching / non-matching / both splits.
Dataset select_task(const Dataset& ds, sim::TaskId id);

// JSON-lines round trip (bit-exact reals) plus a text manifest with the
// generation settings.
void save_jsonl(const std::string& path, const Dataset& ds);
Dataset load_jsonl(const std::string& path);
void save_manifest(const std::string& path, const std::vector<sim::TaskSpec>& tasks,
                   const CollectConfig& cfg, std::uint64_t seed);

}  // namespace invdes::data
