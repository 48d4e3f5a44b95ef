#include "support/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace testsupport {

std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x, double step) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                   double floor_scale) {
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::max(std::abs(a[i]), std::abs(b[i])));
  }
  const double floor = std::max(scale * floor_scale, 1e-300);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace testsupport
