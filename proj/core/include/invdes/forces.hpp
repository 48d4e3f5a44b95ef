#pragma once

// Fused force kernels for the simulator's inner loop. Each has a plain
// Tensor form and a taped Value form backed by a hand-written reverse rule;
// the composed-primitive equivalents live in the contact tests as oracles.

#include <span>

#include "invdes/tape.hpp"
#include "invdes/tensor.hpp"

namespace invdes::sim {

struct ContactParams {
  double radius = 0.03;    // contact radius h
  double width = 0.005;    // softplus smoothing width
  double stiffness = 1200.0;
  double clamp_w = 0.002;  // smooth clamp width for the segment parameter
};

// Softplus penalty contact of every particle against every segment; force
// along the (smoothed) closest-point direction. pos (N,2), segs (S,4) rows
// [ax ay bx by] -> (N,2).
ad::Tensor contact_force(const ad::Tensor& pos, const ad::Tensor& segs, const ContactParams& p);
ad::Value contact_force(ad::Value pos, ad::Value segs, const ContactParams& p);

// Cubic-hinge repulsion along the center line for the given pairs; exactly
// zero at distance >= h. -> (N,2)
ad::Tensor pair_repulsion(const ad::Tensor& pos, std::span<const int> pi,
                          std::span<const int> pj, double h, double k);
ad::Value pair_repulsion(ad::Value pos, std::span<const int> pi, std::span<const int> pj,
                         double h, double k);

// Signed-depth softplus wall penalty per axis for the unit box. -> (N,2)
ad::Tensor wall_force(const ad::Tensor& pos, double margin, double width, double stiffness);
ad::Value wall_force(ad::Value pos, double margin, double width, double stiffness);

// Soft restitution: scales each velocity component by (1 - r * gate) where
// the tanh gate turns on inside the wall margin. -> (N,2) filtered velocity
ad::Tensor wall_velocity_filter(const ad::Tensor& pos, const ad::Tensor& vel, double margin,
                                double width, double restitution);
ad::Value wall_velocity_filter(ad::Value pos, ad::Value vel, double margin, double width,
                               double restitution);

}  // namespace invdes::sim
