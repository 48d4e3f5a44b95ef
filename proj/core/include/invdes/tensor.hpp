#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace invdes::ad {

// Dense 2-D tensor of 64-bit reals, row-major. Scalars are 1x1, column
// vectors Nx1. Every op below validates shapes and rejects non-finite
// results, so a Tensor in flight always holds finite values.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor column(std::vector<double> v);
  static Tensor row(std::vector<double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t numel() const { return v_.size(); }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  double scalar_value() const;  // throws unless 1x1
  std::span<const double> data() const { return v_; }
  std::span<double> data() { return v_; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double> to_vector() const { return v_; }

  std::string shape_str() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// Elementwise binary ops with numpy-style broadcasting over 2-D shapes
// (each dim must match or be 1).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor emax(const Tensor& a, const Tensor& b);  // hard max, ties take a
Tensor smooth_max(const Tensor& a, const Tensor& b, double width);
Tensor smooth_min(const Tensor& a, const Tensor& b, double width);

Tensor smul(const Tensor& a, double c);
Tensor sadd(const Tensor& a, double c);
Tensor neg(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum_all(const Tensor& a);    // 1x1
Tensor sum_axis0(const Tensor& a);  // 1xC, collapses rows
Tensor sum_axis1(const Tensor& a);  // Rx1, collapses cols
Tensor mean_all(const Tensor& a);

Tensor exp_(const Tensor& a);
Tensor log_(const Tensor& a);
Tensor tanh_(const Tensor& a);
Tensor silu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt_(const Tensor& a);
Tensor sin_(const Tensor& a);
Tensor cos_(const Tensor& a);

Tensor norm_all(const Tensor& a);  // 1x1 Frobenius norm
Tensor row_norm(const Tensor& a);  // Rx1 L2 norm per row

Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice(const Tensor& a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);

Tensor gather_rows(const Tensor& a, std::span<const int> idx);
Tensor scatter_rows(const Tensor& a, std::span<const int> idx, std::size_t out_rows);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return smul(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return smul(a, c); }
inline Tensor operator+(const Tensor& a, double c) { return sadd(a, c); }
inline Tensor operator+(double c, const Tensor& a) { return sadd(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return sadd(a, -c); }
inline Tensor operator-(double c, const Tensor& a) { return sadd(neg(a), c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator/(const Tensor& a, double c) { return smul(a, 1.0 / c); }

}  // namespace invdes::ad
