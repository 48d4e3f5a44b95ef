#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "invdes/tensor.hpp"

namespace invdes::ad {

class Tape;

// Handle to a node on a tape. Ops on Values compute eagerly and record the
// node needed for the reverse sweep.
struct Value {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

enum class Op : std::uint8_t {
  input, constant,
  add, sub, mul, div, emax, smax, smin,
  smul, sadd, neg,
  matmul, transpose,
  sum, sum_axis0, sum_axis1, mean,
  exp, log, tanh, silu, softplus, square, sqrt,
  sin, cos,
  norm, row_norm,
  concat_rows, concat_cols, slice,
  gather_rows, scatter_rows,
  custom,
};

const char* op_name(Op op);

// Fused kernel with a hand-written reverse rule, for force laws that would
// otherwise burn dozens of elementwise passes. Implementations accumulate
// into ga/gb (either may be null when that input needs no gradient).
class CustomKernel {
 public:
  virtual ~CustomKernel() = default;
  virtual const char* name() const = 0;
  virtual void backward(const Tensor& g, const Tensor& out, const Tensor& va,
                        const Tensor* vb, Tensor* ga, Tensor* gb) const = 0;
};

// Single-use recording of one evaluation: ops append nodes, backward()
// consumes them in reverse topological (= insertion) order and clears the
// tape. A tape is confined to one thread.
class Tape {
 public:
  Value input(Tensor v);     // differentiable leaf
  Value constant(Tensor v);  // non-differentiable leaf

  const Tensor& val(Value v) const;
  std::size_t num_nodes() const { return nodes_.size(); }
  void clear();

  // Gradients of a scalar output w.r.t. each of `wrt`; clears the tape.
  std::vector<Tensor> backward(Value output, std::span<const Value> wrt);

  // Vector-Jacobian product: seeds arbitrary nodes with cotangents instead
  // of requiring a scalar output. Also clears the tape.
  std::vector<Tensor> backward_seeded(std::span<const std::pair<Value, Tensor>> seeds,
                                      std::span<const Value> wrt);

  // Recording entry used by the op functions.
  Value record(Op op, int a, int b, Tensor value, double attr0 = 0.0, double attr1 = 0.0,
               std::vector<int> idx = {});
  Value record_custom(Value a, Value b, Tensor value, std::shared_ptr<const CustomKernel> k);

 private:
  struct Node {
    Op op;
    int a = -1, b = -1;
    double attr0 = 0.0, attr1 = 0.0;
    std::vector<int> idx;  // slice bounds or gather/scatter row indices
    std::shared_ptr<const CustomKernel> kernel;
    Tensor value;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;

  std::vector<Tensor> run_backward(std::span<const std::pair<Value, Tensor>> seeds,
                                   std::span<const Value> wrt);
};

Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value div(Value a, Value b);
Value emax(Value a, Value b);
Value smooth_max(Value a, Value b, double width);
Value smooth_min(Value a, Value b, double width);
Value smul(Value a, double c);
Value sadd(Value a, double c);
Value neg(Value a);
Value matmul(Value a, Value b);
Value transpose(Value a);
Value sum_all(Value a);
Value sum_axis0(Value a);
Value sum_axis1(Value a);
Value mean_all(Value a);
Value exp_(Value a);
Value log_(Value a);
Value tanh_(Value a);
Value silu(Value a);
Value softplus(Value a);
Value square(Value a);
Value sqrt_(Value a);
Value sin_(Value a);
Value cos_(Value a);
Value norm_all(Value a);
Value row_norm(Value a);
Value concat_rows(Value a, Value b);
Value concat_cols(Value a, Value b);
Value slice(Value a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);
Value gather_rows(Value a, std::span<const int> idx);
Value scatter_rows(Value a, std::span<const int> idx, std::size_t out_rows);

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }
inline Value operator/(Value a, Value b) { return div(a, b); }
inline Value operator*(Value a, double c) { return smul(a, c); }
inline Value operator*(double c, Value a) { return smul(a, c); }
inline Value operator+(Value a, double c) { return sadd(a, c); }
inline Value operator+(double c, Value a) { return sadd(a, c); }
inline Value operator-(Value a, double c) { return sadd(a, -c); }
inline Value operator-(double c, Value a) { return sadd(neg(a), c); }
inline Value operator-(Value a) { return neg(a); }
inline Value operator/(Value a, double c) { return smul(a, 1.0 / c); }

}  // namespace invdes::ad
