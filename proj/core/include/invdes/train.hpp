#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "invdes/denoiser.hpp"
#include "invdes/rng.hpp"
#include "invdes/schedule.hpp"
#include "invdes/tensor.hpp"

namespace invdes::diffusion {

struct TrainConfig {
  int batch = 128;
  int steps = 2000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool conditional = false;
  double cond_dropout = 0.1;  // zeroing rate of the conditioning inputs
  std::vector<int> hidden = {256, 256, 256};
};

// One score-matching draw: per batch element t ~ U(0,1), eps ~ N(0,I) and
// the perturbed x_t rows.
struct DsmBatch {
  ad::Tensor t;    // (B,1)
  ad::Tensor eps;  // (B,d)
  ad::Tensor x_t;  // (B,d)
};
DsmBatch dsm_draw(const ad::Tensor& x0, const NoiseSchedule& sched, RngStream& rng);

// Mean over the batch of the squared prediction error norm; the loss any
// predictor (including test doubles) is scored with.
double dsm_loss_from_prediction(const ad::Tensor& pred_eps, const ad::Tensor& eps);

// Denoising score matching on one batch: draws via dsm_draw, regresses eps.
// Returns the loss and the gradient for every parameter block. x0 is in
// standardized coordinates.
std::pair<double, std::vector<ad::Tensor>> dsm_loss(const DenoiserWeights& w,
                                                    const ad::Tensor& x0,
                                                    const ad::Tensor* cond, RngStream& rng);

struct TrainLog {
  std::vector<double> loss;  // one entry per step
};

// Adam-trains a denoiser on raw design rows (standardization is fitted
// here and stored with the weights). cond rows are (M,3): goal, percentile.
std::pair<DenoiserWeights, TrainLog> train_denoiser(const ad::Tensor& designs,
                                                    const ad::Tensor* cond,
                                                    const TrainConfig& cfg,
                                                    const NoiseSchedule& sched);

}  // namespace invdes::diffusion
