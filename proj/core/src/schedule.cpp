#include "invdes/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace invdes::diffusion {

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("diffusion time " + std::to_string(t) + " outside [0,1]");
  }
}

}  // namespace

double NoiseSchedule::beta(double t) const {
  check_time(t);
  return beta_min + t * (beta_max - beta_min);
}

double NoiseSchedule::alpha(double t) const {
  check_time(t);
  // 2 * int_0^t (beta_min + s (beta_max - beta_min)) ds
  return std::exp(-(2.0 * beta_min * t + (beta_max - beta_min) * t * t));
}

double NoiseSchedule::sigma_bar(double t) const {
  const double a = alpha(t);
  return std::sqrt(1.0 - a) / std::sqrt(a);
}

}  // namespace invdes::diffusion
