#include "invdes/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>

#include "invdes/detail/scalar_math.hpp"

namespace invdes::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string("shape mismatch in '") + op + "': " +
                              a.shape_str() + " vs " + b.shape_str());
}

void check_finite(const char* op, const Tensor& t) {
  double probe = 0.0;
  for (double x : t.data()) probe += x;
  if (std::isfinite(probe)) return;  // no element can be inf/nan
  if (!t.all_finite()) {
    throw std::runtime_error(std::string("non-finite value produced by op '") + op +
                             "' (shape " + t.shape_str() + ")");
  }
}

using detail::sigmoid;
using detail::softplus1;

bool broadcastable(std::size_t a, std::size_t b) { return a == b || a == 1 || b == 1; }

template <class F>
Tensor broadcast_binary(const char* op, const Tensor& a, const Tensor& b, F&& f) {
  if (!broadcastable(a.rows(), b.rows()) || !broadcastable(a.cols(), b.cols())) {
    shape_error(op, a, b);
  }
  const std::size_t R = std::max(a.rows(), b.rows());
  const std::size_t C = std::max(a.cols(), b.cols());
  Tensor out(R, C);
  if (a.same_shape(b)) {  // fast path: plain linear loops
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] = f(pa[i], pb[i]);
  } else if (a.rows() == R && a.cols() == C && b.rows() == 1 && b.cols() == C) {
    const double* pb = b.data().data();
    for (std::size_t r = 0; r < R; ++r) {
      const double* pa = &a.data()[r * C];
      double* po = &out.data()[r * C];
      for (std::size_t c = 0; c < C; ++c) po[c] = f(pa[c], pb[c]);
    }
  } else if (a.rows() == R && a.cols() == C && b.rows() == R && b.cols() == 1) {
    for (std::size_t r = 0; r < R; ++r) {
      const double* pa = &a.data()[r * C];
      const double bv = b(r, 0);
      double* po = &out.data()[r * C];
      for (std::size_t c = 0; c < C; ++c) po[c] = f(pa[c], bv);
    }
  } else {
    const std::size_t ar = a.rows() == 1 ? 0 : 1, ac = a.cols() == 1 ? 0 : 1;
    const std::size_t br = b.rows() == 1 ? 0 : 1, bc = b.cols() == 1 ? 0 : 1;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        out(r, c) = f(a(r * ar, c * ac), b(r * br, c * bc));
      }
    }
  }
  check_finite(op, out);
  return out;
}

template <class F>
Tensor unary(const char* op, const Tensor& a, F&& f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i]);
  check_finite(op, out);
  return out;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), v_(std::move(values)) {
  if (v_.size() != rows_ * cols_) {
    throw std::invalid_argument("tensor value count " + std::to_string(v_.size()) +
                                " does not match shape " + shape_str());
  }
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, std::vector<double>{v}); }

Tensor Tensor::column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(n, 1, std::move(v));
}

Tensor Tensor::row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(1, n, std::move(v));
}

double Tensor::scalar_value() const {
  if (!is_scalar()) {
    throw std::invalid_argument("expected scalar tensor, got " + shape_str());
  }
  return v_[0];
}

std::string Tensor::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Tensor::all_finite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary("add", a, b, [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_binary("sub", a, b, [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_binary("mul", a, b, [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return broadcast_binary("div", a, b, [](double x, double y) { return x / y; });
}

Tensor emax(const Tensor& a, const Tensor& b) {
  return broadcast_binary("emax", a, b, [](double x, double y) { return x >= y ? x : y; });
}

Tensor smooth_max(const Tensor& a, const Tensor& b, double width) {
  return broadcast_binary("smooth_max", a, b, [width](double x, double y) {
    const double m = std::max(x, y);
    return m + width * detail::log1p_exp_neg(std::abs(x - y) / width);
  });
}

Tensor smooth_min(const Tensor& a, const Tensor& b, double width) {
  return broadcast_binary("smooth_min", a, b, [width](double x, double y) {
    const double m = std::min(x, y);
    return m - width * detail::log1p_exp_neg(std::abs(x - y) / width);
  });
}

Tensor smul(const Tensor& a, double c) {
  return unary("scalar_mul", a, [c](double x) { return x * c; });
}

Tensor sadd(const Tensor& a, double c) {
  return unary("scalar_add", a, [c](double x) { return x + c; });
}

Tensor neg(const Tensor& a) {
  return unary("neg", a, [](double x) { return -x; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const std::size_t M = a.rows(), K = a.cols(), N = b.cols();
  Tensor out(M, N, 0.0);
  // i-k-j order keeps the inner loop contiguous over both b and out.
  for (std::size_t i = 0; i < M; ++i) {
    double* orow = &out.data()[i * N];
    for (std::size_t k = 0; k < K; ++k) {
      const double aik = a(i, k);
      const double* brow = &b.data()[k * N];
      for (std::size_t j = 0; j < N; ++j) orow[j] += aik * brow[j];
    }
  }
  check_finite("matmul", out);
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  Tensor out = Tensor::scalar(s);
  check_finite("sum", out);
  return out;
}

Tensor sum_axis0(const Tensor& a) {
  Tensor out(1, a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
  }
  check_finite("sum_axis0", out);
  return out;
}

Tensor sum_axis1(const Tensor& a) {
  Tensor out(a.rows(), 1, 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c);
    out(r, 0) = s;
  }
  check_finite("sum_axis1", out);
  return out;
}

Tensor mean_all(const Tensor& a) {
  if (a.numel() == 0) throw std::invalid_argument("mean of empty tensor");
  return smul(sum_all(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor exp_(const Tensor& a) { return unary("exp", a, [](double x) { return std::exp(x); }); }
Tensor log_(const Tensor& a) { return unary("log", a, [](double x) { return std::log(x); }); }
Tensor tanh_(const Tensor& a) { return unary("tanh", a, [](double x) { return std::tanh(x); }); }

Tensor silu(const Tensor& a) {
  return unary("silu", a, [](double x) { return x * sigmoid(x); });
}

Tensor softplus(const Tensor& a) {
  return unary("softplus", a, [](double x) { return softplus1(x); });
}

Tensor square(const Tensor& a) { return unary("square", a, [](double x) { return x * x; }); }
Tensor sqrt_(const Tensor& a) { return unary("sqrt", a, [](double x) { return std::sqrt(x); }); }
Tensor sin_(const Tensor& a) { return unary("sin", a, [](double x) { return std::sin(x); }); }
Tensor cos_(const Tensor& a) { return unary("cos", a, [](double x) { return std::cos(x); }); }

Tensor norm_all(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  Tensor out = Tensor::scalar(std::sqrt(s));
  check_finite("norm", out);
  return out;
}

Tensor row_norm(const Tensor& a) {
  Tensor out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * a(r, c);
    out(r, 0) = std::sqrt(s);
  }
  check_finite("row_norm", out);
  return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_error("concat_rows", a, b);
  Tensor out(a.rows() + b.rows(), a.cols());
  std::size_t i = 0;
  for (double x : a.data()) out[i++] = x;
  for (double x : b.data()) out[i++] = x;
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
  Tensor out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
  }
  return out;
}

Tensor slice(const Tensor& a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  if (r1 > a.rows() || c1 > a.cols() || r0 > r1 || c0 > c1) {
    throw std::invalid_argument("slice [" + std::to_string(r0) + "," + std::to_string(r1) +
                                ")x[" + std::to_string(c0) + "," + std::to_string(c1) +
                                ") out of range for " + a.shape_str());
  }
  Tensor out(r1 - r0, c1 - c0);
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) out(r - r0, c - c0) = a(r, c);
  }
  return out;
}

Tensor gather_rows(const Tensor& a, std::span<const int> idx) {
  Tensor out(idx.size(), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int r = idx[k];
    if (r < 0 || static_cast<std::size_t>(r) >= a.rows()) {
      throw std::invalid_argument("gather_rows index " + std::to_string(r) +
                                  " out of range for " + a.shape_str());
    }
    for (std::size_t c = 0; c < a.cols(); ++c) out(k, c) = a(static_cast<std::size_t>(r), c);
  }
  return out;
}

Tensor scatter_rows(const Tensor& a, std::span<const int> idx, std::size_t out_rows) {
  if (idx.size() != a.rows()) {
    throw std::invalid_argument("scatter_rows expects one index per row, got " +
                                std::to_string(idx.size()) + " for " + a.shape_str());
  }
  Tensor out(out_rows, a.cols(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int r = idx[k];
    if (r < 0 || static_cast<std::size_t>(r) >= out_rows) {
      throw std::invalid_argument("scatter_rows index " + std::to_string(r) +
                                  " out of range for " + std::to_string(out_rows) + " rows");
    }
    for (std::size_t c = 0; c < a.cols(); ++c) out(static_cast<std::size_t>(r), c) += a(k, c);
  }
  check_finite("scatter_rows", out);
  return out;
}

}  // namespace invdes::ad
