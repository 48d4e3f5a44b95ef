#include "invdes/train.hpp"

#include <cmath>
#include <stdexcept>

#include "invdes/adam.hpp"
#include "invdes/sampler.hpp"
#include "invdes/tape.hpp"

namespace invdes::diffusion {

using ad::Tensor;
using ad::Value;

DsmBatch dsm_draw(const Tensor& x0, const NoiseSchedule& sched, RngStream& rng) {
  if (x0.rows() == 0) throw std::invalid_argument("dsm_draw: empty batch");
  const std::size_t B = x0.rows(), d = x0.cols();
  DsmBatch out{Tensor(B, 1), Tensor(B, d), Tensor(B, d)};
  for (std::size_t r = 0; r < B; ++r) {
    const double t = rng.uniform();
    out.t(r, 0) = t;
    const double a = sched.alpha(t);
    const double sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
    for (std::size_t c = 0; c < d; ++c) {
      const double e = rng.normal();
      out.eps(r, c) = e;
      out.x_t(r, c) = sa * x0(r, c) + sn * e;
    }
  }
  return out;
}

double dsm_loss_from_prediction(const Tensor& pred_eps, const Tensor& eps) {
  if (!pred_eps.same_shape(eps)) {
    throw std::invalid_argument("dsm loss: prediction shape " + pred_eps.shape_str() +
                                " does not match noise shape " + eps.shape_str());
  }
  double s = 0.0;
  for (std::size_t k = 0; k < eps.numel(); ++k) {
    const double dv = pred_eps[k] - eps[k];
    s += dv * dv;
  }
  return s / static_cast<double>(eps.rows());
}

std::pair<double, std::vector<Tensor>> dsm_loss(const DenoiserWeights& w, const Tensor& x0,
                                                const Tensor* cond, RngStream& rng) {
  const DsmBatch b = dsm_draw(x0, w.schedule, rng);

  ad::Tape tape;
  std::vector<Value> params;
  params.reserve(w.params.size());
  for (const Tensor& p : w.params) params.push_back(tape.input(p));
  Value x = tape.constant(b.x_t);
  Value pred = denoiser_forward_t(tape, w, params, x, b.t, cond);
  Value loss = smul(sum_all(square(sub(pred, tape.constant(b.eps)))),
                    1.0 / static_cast<double>(x0.rows()));
  const double value = tape.val(loss).scalar_value();
  auto grads = tape.backward(loss, params);
  return {value, std::move(grads)};
}

std::pair<DenoiserWeights, TrainLog> train_denoiser(const Tensor& designs, const Tensor* cond,
                                                    const TrainConfig& cfg,
                                                    const NoiseSchedule& sched) {
  if (designs.rows() == 0) throw std::invalid_argument("train_denoiser: empty dataset");
  if (cfg.batch < 1 || cfg.steps < 1) {
    throw std::invalid_argument("train_denoiser: batch and steps must be positive");
  }
  if (cfg.conditional && (!cond || cond->rows() != designs.rows() || cond->cols() != 3)) {
    throw std::invalid_argument("train_denoiser: conditional training needs (M,3) rows");
  }

  MlpArch arch;
  arch.design_dim = static_cast<int>(designs.cols());
  arch.hidden = cfg.hidden;
  arch.conditional = cfg.conditional;

  RngStream root = RngStream::root(cfg.seed);
  RngStream init_rng = root.sub("init");
  Standardizer st = Standardizer::fit(designs);
  DenoiserWeights w = DenoiserWeights::init(arch, sched, st, init_rng);
  const Tensor x_std = st.standardize(designs);

  std::vector<ad::AdamState> opt;
  for (const Tensor& p : w.params) {
    opt.push_back(ad::AdamState::init(p.rows(), p.cols(), ad::AdamConfig{.lr = cfg.lr}));
  }
  const auto names = w.param_names();

  TrainLog log;
  const std::size_t M = designs.rows();
  const std::size_t B = static_cast<std::size_t>(cfg.batch);
  for (int step = 0; step < cfg.steps; ++step) {
    RngStream pick = root.sub("batch", static_cast<std::uint64_t>(step));
    Tensor xb(B, x_std.cols());
    Tensor cb(B, 3, 0.0);
    for (std::size_t r = 0; r < B; ++r) {
      const std::size_t k = static_cast<std::size_t>(pick.integer(M));
      for (std::size_t c = 0; c < x_std.cols(); ++c) xb(r, c) = x_std(k, c);
      if (cfg.conditional) {
        // conditioning rows are zeroed at the dropout rate so the network
        // doubles as its own unconditional branch
        if (pick.uniform() >= cfg.cond_dropout) {
          for (std::size_t c = 0; c < 3; ++c) cb(r, c) = (*cond)(k, c);
        }
      }
    }
    RngStream noise = root.sub("noise", static_cast<std::uint64_t>(step));
    auto [loss, grads] = dsm_loss(w, xb, cfg.conditional ? &cb : nullptr, noise);
    for (std::size_t p = 0; p < w.params.size(); ++p) {
      ad::adam_step(w.params[p], grads[p], opt[p], names[p]);
    }
    log.loss.push_back(loss);
  }
  return {std::move(w), std::move(log)};
}

}  // namespace invdes::diffusion
