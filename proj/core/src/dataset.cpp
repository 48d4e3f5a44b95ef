#include "invdes/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "invdes/config.hpp"
#include "invdes/parallel.hpp"

namespace invdes::data {

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "cem") return OptimizerKind::cem;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "both") return OptimizerKind::both;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

const char* optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::cem: return "cem";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::both: return "both";
  }
  return "?";
}

ad::Tensor Dataset::design_matrix() const {
  if (records.empty()) throw std::invalid_argument("empty dataset");
  const std::size_t d = records[0].design.size();
  ad::Tensor out(records.size(), d);
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].design.size() != d) {
      throw std::invalid_argument("dataset mixes design dimensionalities");
    }
    for (std::size_t c = 0; c < d; ++c) out(r, c) = records[r].design[c];
  }
  return out;
}

ad::Tensor Dataset::conditioning_matrix() const {
  ad::Tensor out(records.size(), 3);
  for (std::size_t r = 0; r < records.size(); ++r) {
    out(r, 0) = records[r].goal[0];
    out(r, 1) = records[r].goal[1];
    out(r, 2) = records[r].percentile;
  }
  return out;
}

namespace {

// One optimizer run on a task instance with a freshly sampled goal.
struct RunSpec {
  sim::TaskSpec task;
  OptimizerKind optimizer;  // cem or adam
  int run_id;
  std::uint64_t seed_index;
};

void append_trace(Dataset& ds, const optim::OptTrace& trace, const RunSpec& run) {
  for (const auto& pt : trace.points) {
    DesignRecord rec;
    rec.design = pt.design.params;
    rec.cost = pt.cost;
    rec.task = run.task.id;
    rec.goal = run.task.goals[0];
    rec.source = optimizer_name(run.optimizer);
    rec.run_id = run.run_id;
    rec.iteration = pt.iteration;
    ds.records.push_back(rec);
  }
}

}  // namespace

Dataset collect_dataset(const std::vector<sim::TaskSpec>& tasks, const CollectConfig& cfg,
                        RngStream& rng) {
  if (cfg.runs_per_task < 1) throw std::invalid_argument("need at least one run per task");

  std::vector<RunSpec> runs;
  for (const sim::TaskSpec& base : tasks) {
    std::vector<OptimizerKind> kinds;
    if (cfg.optimizer == OptimizerKind::both) {
      kinds = {OptimizerKind::cem, OptimizerKind::adam};
    } else {
      kinds = {cfg.optimizer};
    }
    for (OptimizerKind kind : kinds) {
      for (int r = 0; r < cfg.runs_per_task; ++r) {
        RunSpec run;
        run.task = base;
        run.optimizer = kind;
        run.run_id = r;
        run.seed_index = hash_combine(hash_str(task_name(base.id)),
                                      hash_combine(hash_str(optimizer_name(kind)),
                                                   static_cast<std::uint64_t>(r)));
        // goals are sampled uniformly in the reward sampling box(es)
        RngStream goal_rng = rng.sub("train-goals", run.seed_index);
        for (std::size_t g = 0; g < run.task.goals.size(); ++g) {
          const sim::Box& box = run.task.reward_boxes[g];
          run.task.goals[g] = {goal_rng.uniform(box.left, box.right),
                               goal_rng.uniform(box.bottom, box.top)};
        }
        runs.push_back(std::move(run));
      }
    }
  }

  std::vector<Dataset> partial(runs.size());
  parallel_for(runs.size(), cfg.threads, [&](std::size_t i) {
    const RunSpec& run = runs[i];
    energy::EnergyModel energy(run.task, cfg.sim);
    try {
      if (run.optimizer == OptimizerKind::cem) {
        RngStream crng = rng.sub("cem-run", run.seed_index);
        optim::OptTrace trace = optim::cem_design_opt(cfg.cem, energy, crng);
        append_trace(partial[i], trace, run);
      } else {
        optim::OptTrace trace =
            optim::adam_design_opt(optim::flat_design(run.task), energy, cfg.adam_steps,
                                   cfg.adam_lr);
        append_trace(partial[i], trace, run);
      }
    } catch (const std::exception& e) {
      std::cerr << "datagen: skipping " << optimizer_name(run.optimizer) << " run "
                << run.run_id << " on " << task_name(run.task.id) << ": " << e.what() << "\n";
    }
  });

  Dataset ds;
  for (const Dataset& p : partial) {
    ds.records.insert(ds.records.end(), p.records.begin(), p.records.end());
  }
  if (ds.records.empty()) throw std::runtime_error("datagen produced no records");
  percentile_rank(ds);
  return ds;
}

Dataset filter_by_cutoff(const Dataset& ds, double cutoff) {
  Dataset out;
  for (const auto& rec : ds.records) {
    if (rec.cost < cutoff) out.records.push_back(rec);
  }
  if (out.records.empty()) {
    throw std::invalid_argument("cutoff " + std::to_string(cutoff) +
                                " removes every record (untrainable)");
  }
  percentile_rank(out);
  return out;
}

void percentile_rank(Dataset& ds) {
  if (ds.records.empty()) throw std::invalid_argument("cannot rank an empty dataset");
  std::map<sim::TaskId, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    by_task[ds.records[i].task].push_back(i);
  }
  for (auto& [task, idx] : by_task) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return ds.records[a].cost < ds.records[b].cost;
    });
    const std::size_t n = idx.size();
    if (n == 1) {
      ds.records[idx[0]].percentile = 0.0;
      continue;
    }
    // ties share the average rank
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && ds.records[idx[j + 1]].cost == ds.records[idx[i]].cost) ++j;
      const double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j));
      for (std::size_t k = i; k <= j; ++k) {
        ds.records[idx[k]].percentile = avg_rank / static_cast<double>(n - 1);
      }
      i = j + 1;
    }
  }
}

Dataset select_task(const Dataset& ds, sim::TaskId id) {
  Dataset out;
  for (const auto& rec : ds.records) {
    if (rec.task == id) out.records.push_back(rec);
  }
  if (!out.records.empty()) percentile_rank(out);
  return out;
}

void save_jsonl(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write dataset: " + path);
  os << nlohmann::json{{"format", "invdes-dataset"}, {"version", 1}}.dump() << "\n";
  for (const auto& rec : ds.records) {
    nlohmann::json j;
    j["design"] = rec.design;
    j["cost"] = rec.cost;
    j["task"] = sim::task_name(rec.task);
    j["goal"] = rec.goal;
    j["percentile"] = rec.percentile;
    j["source"] = rec.source;
    j["run"] = rec.run_id;
    j["iter"] = rec.iteration;
    os << j.dump() << "\n";
  }
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty dataset file: " + path);
  nlohmann::json tag = nlohmann::json::parse(line);
  if (tag.value("format", "") != "invdes-dataset") {
    throw std::runtime_error("not a dataset file: " + path);
  }
  Dataset ds;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    DesignRecord rec;
    rec.design = j.at("design").get<std::vector<double>>();
    rec.cost = j.at("cost").get<double>();
    rec.task = sim::task_from_name(j.at("task").get<std::string>());
    rec.goal = j.at("goal").get<std::array<double, 2>>();
    rec.percentile = j.at("percentile").get<double>();
    rec.source = j.at("source").get<std::string>();
    rec.run_id = j.at("run").get<int>();
    rec.iteration = j.at("iter").get<int>();
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void save_manifest(const std::string& path, const std::vector<sim::TaskSpec>& tasks,
                   const CollectConfig& cfg, std::uint64_t seed) {
  std::ostringstream os;
  os << "format = invdes-dataset-manifest\n";
  os << "version = 1\n";
  os << "seed = " << seed << "\n";
  os << "optimizer = " << optimizer_name(cfg.optimizer) << "\n";
  os << "runs_per_task = " << cfg.runs_per_task << "\n";
  os << "cem_population = " << cfg.cem.population << "\n";
  os << "cem_iterations = " << cfg.cem.iterations << "\n";
  os << "adam_steps = " << cfg.adam_steps << "\n";
  os << "adam_lr = " << cfg.adam_lr << "\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    os << "\n[task_" << i << "]\n" << sim::task_to_text(tasks[i]);
  }
  write_text_file(path, os.str());
}

}  // namespace invdes::data
