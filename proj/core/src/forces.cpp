#include "invdes/forces.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "invdes/detail/scalar_math.hpp"

namespace invdes::sim {

using ad::Tensor;
using ad::Value;
using ad::detail::log1p_exp_neg;
using ad::detail::sigmoid;
using ad::detail::softplus1;

namespace {

void check_pos(const Tensor& pos, const char* who) {
  if (pos.cols() != 2) {
    throw std::invalid_argument(std::string(who) + ": positions must be (N,2), got " +
                                pos.shape_str());
  }
}

// Smooth clamp of the segment parameter to [0,1] and its derivative.
inline void smooth_clamp01(double t, double wc, double& tc, double& q) {
  const double a1 = std::max(t, 0.0) + wc * log1p_exp_neg(std::abs(t) / wc);
  tc = std::min(a1, 1.0) - wc * log1p_exp_neg(std::abs(a1 - 1.0) / wc);
  q = sigmoid(t / wc) * sigmoid((1.0 - a1) / wc);
}

struct SegCache {
  std::vector<double> ux, uy, len2;
  std::vector<double> lox, hix, loy, hiy;  // AABB inflated by the force cutoff
};

SegCache segment_cache(const Tensor& segs, double cut) {
  SegCache c;
  const std::size_t S = segs.rows();
  c.ux.resize(S);
  c.uy.resize(S);
  c.len2.resize(S);
  c.lox.resize(S);
  c.hix.resize(S);
  c.loy.resize(S);
  c.hiy.resize(S);
  // the smooth parameter clamp can put the closest point slightly past the
  // endpoints, so pad the box a bit beyond the cutoff
  const double pad = cut + 0.01;
  for (std::size_t s = 0; s < S; ++s) {
    c.ux[s] = segs(s, 2) - segs(s, 0);
    c.uy[s] = segs(s, 3) - segs(s, 1);
    c.len2[s] = c.ux[s] * c.ux[s] + c.uy[s] * c.uy[s] + 1e-12;
    c.lox[s] = std::min(segs(s, 0), segs(s, 2)) - pad;
    c.hix[s] = std::max(segs(s, 0), segs(s, 2)) + pad;
    c.loy[s] = std::min(segs(s, 1), segs(s, 3)) - pad;
    c.hiy[s] = std::max(segs(s, 1), segs(s, 3)) + pad;
  }
  return c;
}

}  // namespace

Tensor contact_force(const Tensor& pos, const Tensor& segs, const ContactParams& p) {
  check_pos(pos, "contact_force");
  if (segs.cols() != 4) {
    throw std::invalid_argument("contact_force: segments must be (S,4), got " + segs.shape_str());
  }
  const std::size_t N = pos.rows(), S = segs.rows();
  // beyond this distance the saturated softplus is exactly zero
  const double cut = p.radius - ad::detail::kSatLo * p.width;
  const double cut2 = cut * cut;
  const SegCache sc = segment_cache(segs, cut);

  Tensor out(N, 2, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double px = pos(i, 0), py = pos(i, 1);
    double fx = 0.0, fy = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (px < sc.lox[s] || px > sc.hix[s] || py < sc.loy[s] || py > sc.hiy[s]) continue;
      const double ax = segs(s, 0), ay = segs(s, 1);
      const double t = ((px - ax) * sc.ux[s] + (py - ay) * sc.uy[s]) / sc.len2[s];
      double tc, q;
      smooth_clamp01(t, p.clamp_w, tc, q);
      const double ddx = px - (ax + tc * sc.ux[s]);
      const double ddy = py - (ay + tc * sc.uy[s]);
      const double dist2 = ddx * ddx + ddy * ddy + 1e-12;
      if (dist2 >= cut2) continue;
      const double dist = std::sqrt(dist2);
      const double mag = p.stiffness * p.width * softplus1((p.radius - dist) / p.width);
      fx += mag * ddx / dist;
      fy += mag * ddy / dist;
    }
    out(i, 0) = fx;
    out(i, 1) = fy;
  }
  if (!out.all_finite()) throw std::runtime_error("non-finite value produced by op 'contact_force'");
  return out;
}

namespace {

void contact_backward(const Tensor& g, const Tensor& pos, const Tensor& segs,
                      const ContactParams& p, Tensor* gpos, Tensor* gsegs) {
  const std::size_t N = pos.rows(), S = segs.rows();
  const double cut = p.radius - ad::detail::kSatLo * p.width;
  const double cut2 = cut * cut;
  const SegCache sc = segment_cache(segs, cut);

  for (std::size_t i = 0; i < N; ++i) {
    const double px = pos(i, 0), py = pos(i, 1);
    const double gfx = g(i, 0), gfy = g(i, 1);
    if (gfx == 0.0 && gfy == 0.0) continue;
    for (std::size_t s = 0; s < S; ++s) {
      if (px < sc.lox[s] || px > sc.hix[s] || py < sc.loy[s] || py > sc.hiy[s]) continue;
      const double ax = segs(s, 0), ay = segs(s, 1);
      const double ux = sc.ux[s], uy = sc.uy[s], len2 = sc.len2[s];
      const double rx = px - ax, ry = py - ay;
      const double t = (rx * ux + ry * uy) / len2;
      double tc, q;
      smooth_clamp01(t, p.clamp_w, tc, q);
      const double ddx = px - (ax + tc * ux);
      const double ddy = py - (ay + tc * uy);
      const double dist2 = ddx * ddx + ddy * ddy + 1e-12;
      if (dist2 >= cut2) continue;
      const double dist = std::sqrt(dist2);
      const double z = (p.radius - dist) / p.width;
      const double mag = p.stiffness * p.width * softplus1(z);
      const double mprime = -p.stiffness * sigmoid(z);
      const double sfac = mag / dist;
      const double sprime = (mprime * dist - mag) / dist2;

      const double gf_dd = gfx * ddx + gfy * ddy;
      const double gddx = sfac * gfx + (sprime / dist) * gf_dd * ddx;
      const double gddy = sfac * gfy + (sprime / dist) * gf_dd * ddy;
      const double gt = -q * (ux * gddx + uy * gddy) / len2;

      if (gpos) {
        (*gpos)(i, 0) += gddx + gt * ux;
        (*gpos)(i, 1) += gddy + gt * uy;
      }
      if (gsegs) {
        (*gsegs)(s, 0) += -(1.0 - tc) * gddx + gt * (-ux - rx + 2.0 * t * ux);
        (*gsegs)(s, 1) += -(1.0 - tc) * gddy + gt * (-uy - ry + 2.0 * t * uy);
        (*gsegs)(s, 2) += -tc * gddx + gt * (rx - 2.0 * t * ux);
        (*gsegs)(s, 3) += -tc * gddy + gt * (ry - 2.0 * t * uy);
      }
    }
  }
}

class ContactKernel : public ad::CustomKernel {
 public:
  explicit ContactKernel(ContactParams p) : p_(p) {}
  const char* name() const override { return "contact_force"; }
  void backward(const Tensor& g, const Tensor&, const Tensor& va, const Tensor* vb,
                Tensor* ga, Tensor* gb) const override {
    contact_backward(g, va, *vb, p_, ga, gb);
  }

 private:
  ContactParams p_;
};

}  // namespace

Value contact_force(Value pos, Value segs, const ContactParams& p) {
  Tensor out = contact_force(pos.tape->val(pos), segs.tape->val(segs), p);
  return pos.tape->record_custom(pos, segs, std::move(out),
                                 std::make_shared<ContactKernel>(p));
}

Tensor pair_repulsion(const Tensor& pos, std::span<const int> pi, std::span<const int> pj,
                      double h, double k) {
  check_pos(pos, "pair_repulsion");
  const double K = k / (h * h);
  Tensor out(pos.rows(), 2, 0.0);
  for (std::size_t n = 0; n < pi.size(); ++n) {
    const int i = pi[n], j = pj[n];
    const double dx = pos(i, 0) - pos(j, 0);
    const double dy = pos(i, 1) - pos(j, 1);
    const double d = std::sqrt(dx * dx + dy * dy + 1e-12);
    const double o = h - d;
    if (o <= 0.0) continue;
    const double s = K * o * o * o / d;
    out(i, 0) += s * dx;
    out(i, 1) += s * dy;
    out(j, 0) -= s * dx;
    out(j, 1) -= s * dy;
  }
  if (!out.all_finite()) throw std::runtime_error("non-finite value produced by op 'pair_repulsion'");
  return out;
}

namespace {

class RepulsionKernel : public ad::CustomKernel {
 public:
  RepulsionKernel(std::vector<int> pi, std::vector<int> pj, double h, double k)
      : pi_(std::move(pi)), pj_(std::move(pj)), h_(h), k_(k) {}
  const char* name() const override { return "pair_repulsion"; }
  void backward(const Tensor& g, const Tensor&, const Tensor& pos, const Tensor*,
                Tensor* gpos, Tensor*) const override {
    if (!gpos) return;
    const double K = k_ / (h_ * h_);
    for (std::size_t n = 0; n < pi_.size(); ++n) {
      const int i = pi_[n], j = pj_[n];
      const double dx = pos(i, 0) - pos(j, 0);
      const double dy = pos(i, 1) - pos(j, 1);
      const double d2 = dx * dx + dy * dy + 1e-12;
      const double d = std::sqrt(d2);
      const double o = h_ - d;
      if (o <= 0.0) continue;
      const double s = K * o * o * o / d;
      const double dsdd = -K * o * o * (3.0 * d + o) / d2;
      const double gfx = g(i, 0) - g(j, 0);
      const double gfy = g(i, 1) - g(j, 1);
      const double gf_dd = gfx * dx + gfy * dy;
      const double gdx = s * gfx + (dsdd / d) * gf_dd * dx;
      const double gdy = s * gfy + (dsdd / d) * gf_dd * dy;
      (*gpos)(i, 0) += gdx;
      (*gpos)(i, 1) += gdy;
      (*gpos)(j, 0) -= gdx;
      (*gpos)(j, 1) -= gdy;
    }
  }

 private:
  std::vector<int> pi_, pj_;
  double h_, k_;
};

}  // namespace

Value pair_repulsion(Value pos, std::span<const int> pi, std::span<const int> pj, double h,
                     double k) {
  Tensor out = pair_repulsion(pos.tape->val(pos), pi, pj, h, k);
  return pos.tape->record_custom(
      pos, Value{}, std::move(out),
      std::make_shared<RepulsionKernel>(std::vector<int>(pi.begin(), pi.end()),
                                        std::vector<int>(pj.begin(), pj.end()), h, k));
}

Tensor wall_force(const Tensor& pos, double margin, double width, double stiffness) {
  check_pos(pos, "wall_force");
  Tensor out(pos.rows(), 2, 0.0);
  const double kw = stiffness * width;
  for (std::size_t i = 0; i < pos.rows(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double x = pos(i, c);
      out(i, c) = kw * (softplus1((margin - x) / width) - softplus1((x - (1.0 - margin)) / width));
    }
  }
  if (!out.all_finite()) throw std::runtime_error("non-finite value produced by op 'wall_force'");
  return out;
}

namespace {

class WallForceKernel : public ad::CustomKernel {
 public:
  WallForceKernel(double margin, double width, double stiffness)
      : m_(margin), w_(width), k_(stiffness) {}
  const char* name() const override { return "wall_force"; }
  void backward(const Tensor& g, const Tensor&, const Tensor& pos, const Tensor*,
                Tensor* gpos, Tensor*) const override {
    if (!gpos) return;
    for (std::size_t i = 0; i < pos.rows(); ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double x = pos(i, c);
        const double d = -k_ * (sigmoid((m_ - x) / w_) + sigmoid((x - (1.0 - m_)) / w_));
        (*gpos)(i, c) += g(i, c) * d;
      }
    }
  }

 private:
  double m_, w_, k_;
};

}  // namespace

Value wall_force(Value pos, double margin, double width, double stiffness) {
  Tensor out = wall_force(pos.tape->val(pos), margin, width, stiffness);
  return pos.tape->record_custom(pos, Value{}, std::move(out),
                                 std::make_shared<WallForceKernel>(margin, width, stiffness));
}

namespace {

inline double gate(double z, double w) { return 0.5 * (1.0 + std::tanh(z / (2.0 * w))); }
inline double dgate(double z, double w) {
  const double t = std::tanh(z / (2.0 * w));
  return (1.0 - t * t) / (4.0 * w);
}

}  // namespace

Tensor wall_velocity_filter(const Tensor& pos, const Tensor& vel, double margin, double width,
                            double restitution) {
  check_pos(pos, "wall_velocity_filter");
  Tensor out(pos.rows(), 2);
  for (std::size_t i = 0; i < pos.rows(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double x = pos(i, c);
      const double gx = gate(margin - x, width) + gate(x - (1.0 - margin), width);
      out(i, c) = vel(i, c) * (1.0 - restitution * gx);
    }
  }
  if (!out.all_finite()) {
    throw std::runtime_error("non-finite value produced by op 'wall_velocity_filter'");
  }
  return out;
}

namespace {

class WallFilterKernel : public ad::CustomKernel {
 public:
  WallFilterKernel(double margin, double width, double restitution)
      : m_(margin), w_(width), r_(restitution) {}
  const char* name() const override { return "wall_velocity_filter"; }
  void backward(const Tensor& g, const Tensor&, const Tensor& pos, const Tensor* vel,
                Tensor* gpos, Tensor* gvel) const override {
    for (std::size_t i = 0; i < pos.rows(); ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double x = pos(i, c);
        const double gx = gate(m_ - x, w_) + gate(x - (1.0 - m_), w_);
        if (gvel) (*gvel)(i, c) += g(i, c) * (1.0 - r_ * gx);
        if (gpos) {
          const double dgx = -dgate(m_ - x, w_) + dgate(x - (1.0 - m_), w_);
          (*gpos)(i, c) += g(i, c) * (*vel)(i, c) * (-r_ * dgx);
        }
      }
    }
  }

 private:
  double m_, w_, r_;
};

}  // namespace

Value wall_velocity_filter(Value pos, Value vel, double margin, double width,
                           double restitution) {
  Tensor out =
      wall_velocity_filter(pos.tape->val(pos), vel.tape->val(vel), margin, width, restitution);
  return pos.tape->record_custom(pos, vel, std::move(out),
                                 std::make_shared<WallFilterKernel>(margin, width, restitution));
}

}  // namespace invdes::sim
