#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invdes/rng.hpp"
#include "invdes/schedule.hpp"
#include "invdes/tape.hpp"
#include "invdes/tensor.hpp"

namespace invdes::diffusion {

// MLP noise predictor. Input layout: [x (design dim)] ++ [time embedding]
// ++ optional [goal_x, goal_y, cost percentile]; output: predicted noise.
struct MlpArch {
  int design_dim = 0;
  std::vector<int> hidden = {256, 256, 256};
  bool conditional = false;
  int time_features = 16;  // sinusoidal pairs, frequencies geometric 1..1000

  int cond_dim() const { return conditional ? 3 : 0; }
  int input_dim() const { return design_dim + time_features + cond_dim(); }
};

// Per-dimension affine map fitted on the training designs; diffusion runs
// in standardized coordinates.
struct Standardizer {
  std::vector<double> mean, scale;  // scale floored away from zero

  static Standardizer fit(const ad::Tensor& rows);
  static Standardizer identity(int dim);
  ad::Tensor standardize(const ad::Tensor& rows) const;
  ad::Tensor destandardize(const ad::Tensor& rows) const;
  std::vector<double> standardize(const std::vector<double>& v) const;
  std::vector<double> destandardize(const std::vector<double>& v) const;
};

struct ConditioningVector {
  double goal_x = 0.0, goal_y = 0.0;
  double percentile = 0.0;  // 0 = best designs
};

struct DenoiserWeights {
  MlpArch arch;
  NoiseSchedule schedule;
  Standardizer standardizer;
  std::vector<ad::Tensor> params;  // W0, b0, W1, b1, ...

  static DenoiserWeights init(const MlpArch& arch, const NoiseSchedule& sched,
                              const Standardizer& st, RngStream& rng);
  std::vector<std::string> param_names() const;
};

// (B, time_features) embedding rows for per-sample times t (B,1).
ad::Tensor time_embedding(const ad::Tensor& t, int features);

// Plain forward pass: x (B, design_dim) in standardized space, per-sample
// times t (B,1), optional conditioning rows (B,3). Zeroed conditioning is
// the network's own unconditional branch.
ad::Tensor denoiser_forward(const DenoiserWeights& w, const ad::Tensor& x, const ad::Tensor& t,
                            const ad::Tensor* cond);
// Convenience for a single shared time.
ad::Tensor denoiser_forward(const DenoiserWeights& w, const ad::Tensor& x, double t,
                            const std::optional<ConditioningVector>& cond);

// Taped forward for training and for gradients through the denoiser.
// `params` must hold tape values for w.params in order; x may be an input
// or a constant.
ad::Value denoiser_forward_t(ad::Tape& tape, const DenoiserWeights& w,
                             std::span<const ad::Value> params, ad::Value x,
                             const ad::Tensor& t, const ad::Tensor* cond);

// Versioned binary checkpoint: JSON header + little-endian parameter block.
void save_checkpoint(const std::string& path, const DenoiserWeights& w);
DenoiserWeights load_checkpoint(const std::string& path);

}  // namespace invdes::diffusion
