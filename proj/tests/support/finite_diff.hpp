#pragma once

#include <functional>
#include <vector>

namespace testsupport {

// Central-difference gradient of a scalar function of a flat vector.
// Lives in test code only; independent of the tape implementation it checks.
std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x, double step);

// Max relative error between two gradients; denominators are floored at
// `floor_scale` times the largest magnitude entry so near-zero components
// do not blow up the ratio.
double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                   double floor_scale = 1e-6);

}  // namespace testsupport
