#include "invdes/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "invdes/detail/scalar_math.hpp"

namespace invdes::ad {

namespace {

using ad::detail::sigmoid;

// Sums a broadcasted gradient back down to the operand's shape.
Tensor reduce_to(const Tensor& g, std::size_t rows, std::size_t cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Tensor out(rows, cols, 0.0);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      out(rows == 1 ? 0 : r, cols == 1 ? 0 : c) += g(r, c);
    }
  }
  return out;
}

// Elementwise product of the output gradient with a broadcast-expanded
// factor derived from the two operand values.
template <class F>
Tensor expand_mul(const Tensor& g, const Tensor& a, const Tensor& b, F&& factor) {
  Tensor out(g.rows(), g.cols());
  const std::size_t ar = a.rows() == 1 ? 0 : 1, ac = a.cols() == 1 ? 0 : 1;
  const std::size_t br = b.rows() == 1 ? 0 : 1, bc = b.cols() == 1 ? 0 : 1;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      out(r, c) = g(r, c) * factor(a(r * ar, c * ac), b(r * br, c * bc));
    }
  }
  return out;
}

void accumulate(Tensor& acc, const Tensor& g, std::size_t rows, std::size_t cols) {
  Tensor reduced = reduce_to(g, rows, cols);
  if (acc.numel() == 0) {
    acc = std::move(reduced);
  } else {
    for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += reduced[i];
  }
}

Value check_same_tape(Value a, Value b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape != b.tape) {
    throw std::invalid_argument(std::string("operands of '") + op +
                                "' must live on the same tape");
  }
  return a;
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::constant: return "constant";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::emax: return "emax";
    case Op::smax: return "smooth_max";
    case Op::smin: return "smooth_min";
    case Op::smul: return "scalar_mul";
    case Op::sadd: return "scalar_add";
    case Op::neg: return "neg";
    case Op::matmul: return "matmul";
    case Op::transpose: return "transpose";
    case Op::sum: return "sum";
    case Op::sum_axis0: return "sum_axis0";
    case Op::sum_axis1: return "sum_axis1";
    case Op::mean: return "mean";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::tanh: return "tanh";
    case Op::silu: return "silu";
    case Op::softplus: return "softplus";
    case Op::square: return "square";
    case Op::sqrt: return "sqrt";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::norm: return "norm";
    case Op::row_norm: return "row_norm";
    case Op::concat_rows: return "concat_rows";
    case Op::concat_cols: return "concat_cols";
    case Op::slice: return "slice";
    case Op::gather_rows: return "gather_rows";
    case Op::scatter_rows: return "scatter_rows";
    case Op::custom: return "custom";
  }
  return "?";
}

Value Tape::input(Tensor v) {
  Value out = record(Op::input, -1, -1, std::move(v));
  nodes_.back().needs_grad = true;
  return out;
}

Value Tape::constant(Tensor v) { return record(Op::constant, -1, -1, std::move(v)); }

Value Tape::record_custom(Value a, Value b, Tensor value, std::shared_ptr<const CustomKernel> k) {
  Value out = record(Op::custom, a.id, b.valid() ? b.id : -1, std::move(value));
  nodes_.back().kernel = std::move(k);
  return out;
}

const Tensor& Tape::val(Value v) const {
  if (!v.valid() || v.tape != this || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::invalid_argument("value does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)].value;
}

void Tape::clear() { nodes_.clear(); }

Value Tape::record(Op op, int a, int b, Tensor value, double attr0, double attr1,
                   std::vector<int> idx) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.attr0 = attr0;
  n.attr1 = attr1;
  n.idx = std::move(idx);
  n.value = std::move(value);
  n.needs_grad = (a >= 0 && nodes_[static_cast<std::size_t>(a)].needs_grad) ||
                 (b >= 0 && nodes_[static_cast<std::size_t>(b)].needs_grad);
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size() - 1)};
}

std::vector<Tensor> Tape::backward(Value output, std::span<const Value> wrt) {
  if (!output.valid() || output.tape != this) {
    throw std::invalid_argument("backward: output does not belong to this tape");
  }
  if (!val(output).is_scalar()) {
    throw std::invalid_argument("backward: output must be scalar, got " +
                                val(output).shape_str());
  }
  const std::pair<Value, Tensor> seed{output, Tensor::scalar(1.0)};
  return run_backward({&seed, 1}, wrt);
}

std::vector<Tensor> Tape::backward_seeded(std::span<const std::pair<Value, Tensor>> seeds,
                                          std::span<const Value> wrt) {
  return run_backward(seeds, wrt);
}

std::vector<Tensor> Tape::run_backward(std::span<const std::pair<Value, Tensor>> seeds,
                                       std::span<const Value> wrt) {
  const std::size_t N = nodes_.size();
  std::vector<Tensor> adj(N);  // empty tensor = zero gradient

  for (const auto& [v, g] : seeds) {
    if (!v.valid() || v.tape != this) {
      throw std::invalid_argument("backward: seed does not belong to this tape");
    }
    const Tensor& value = nodes_[static_cast<std::size_t>(v.id)].value;
    if (!value.same_shape(g)) {
      throw std::invalid_argument("backward: seed shape " + g.shape_str() +
                                  " does not match value shape " + value.shape_str());
    }
    accumulate(adj[static_cast<std::size_t>(v.id)], g, g.rows(), g.cols());
  }

  for (std::size_t i = N; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.needs_grad || adj[i].numel() == 0) continue;
    const Tensor& g = adj[i];
    const Tensor* va = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)].value : nullptr;
    const Tensor* vb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)].value : nullptr;
    auto acc_a = [&](const Tensor& ga) {
      accumulate(adj[static_cast<std::size_t>(n.a)], ga, va->rows(), va->cols());
    };
    auto acc_b = [&](const Tensor& gb) {
      accumulate(adj[static_cast<std::size_t>(n.b)], gb, vb->rows(), vb->cols());
    };
    const bool need_a = n.a >= 0 && nodes_[static_cast<std::size_t>(n.a)].needs_grad;
    const bool need_b = n.b >= 0 && nodes_[static_cast<std::size_t>(n.b)].needs_grad;

    switch (n.op) {
      case Op::input:
      case Op::constant:
        break;
      case Op::add:
        if (need_a) acc_a(g);
        if (need_b) acc_b(g);
        break;
      case Op::sub:
        if (need_a) acc_a(g);
        if (need_b) acc_b(neg(g));
        break;
      case Op::mul:
        if (need_a) acc_a(expand_mul(g, *va, *vb, [](double, double y) { return y; }));
        if (need_b) acc_b(expand_mul(g, *va, *vb, [](double x, double) { return x; }));
        break;
      case Op::div:
        if (need_a) acc_a(expand_mul(g, *va, *vb, [](double, double y) { return 1.0 / y; }));
        if (need_b) {
          acc_b(expand_mul(g, *va, *vb, [](double x, double y) { return -x / (y * y); }));
        }
        break;
      case Op::emax:
        if (need_a) {
          acc_a(expand_mul(g, *va, *vb, [](double x, double y) { return x >= y ? 1.0 : 0.0; }));
        }
        if (need_b) {
          acc_b(expand_mul(g, *va, *vb, [](double x, double y) { return x >= y ? 0.0 : 1.0; }));
        }
        break;
      case Op::smax: {
        const double w = n.attr0;
        if (need_a) {
          acc_a(expand_mul(g, *va, *vb, [w](double x, double y) { return sigmoid((x - y) / w); }));
        }
        if (need_b) {
          acc_b(expand_mul(g, *va, *vb, [w](double x, double y) { return sigmoid((y - x) / w); }));
        }
        break;
      }
      case Op::smin: {
        const double w = n.attr0;
        if (need_a) {
          acc_a(expand_mul(g, *va, *vb, [w](double x, double y) { return sigmoid((y - x) / w); }));
        }
        if (need_b) {
          acc_b(expand_mul(g, *va, *vb, [w](double x, double y) { return sigmoid((x - y) / w); }));
        }
        break;
      }
      case Op::smul:
        if (need_a) acc_a(smul(g, n.attr0));
        break;
      case Op::sadd:
        if (need_a) acc_a(g);
        break;
      case Op::neg:
        if (need_a) acc_a(neg(g));
        break;
      case Op::matmul:
        if (need_a) acc_a(matmul(g, transpose(*vb)));
        if (need_b) acc_b(matmul(transpose(*va), g));
        break;
      case Op::transpose:
        if (need_a) acc_a(transpose(g));
        break;
      case Op::sum:
        if (need_a) acc_a(Tensor(va->rows(), va->cols(), g.scalar_value()));
        break;
      case Op::sum_axis0: {
        if (need_a) {
          Tensor ga(va->rows(), va->cols());
          for (std::size_t r = 0; r < va->rows(); ++r) {
            for (std::size_t c = 0; c < va->cols(); ++c) ga(r, c) = g(0, c);
          }
          acc_a(ga);
        }
        break;
      }
      case Op::sum_axis1: {
        if (need_a) {
          Tensor ga(va->rows(), va->cols());
          for (std::size_t r = 0; r < va->rows(); ++r) {
            for (std::size_t c = 0; c < va->cols(); ++c) ga(r, c) = g(r, 0);
          }
          acc_a(ga);
        }
        break;
      }
      case Op::mean:
        if (need_a) {
          acc_a(Tensor(va->rows(), va->cols(),
                       g.scalar_value() / static_cast<double>(va->numel())));
        }
        break;
      case Op::exp:
        if (need_a) acc_a(mul(g, n.value));
        break;
      case Op::log:
        if (need_a) acc_a(div(g, *va));
        break;
      case Op::tanh:
        if (need_a) acc_a(mul(g, sadd(neg(square(n.value)), 1.0)));
        break;
      case Op::silu: {
        if (need_a) {
          Tensor d(va->rows(), va->cols());
          for (std::size_t i = 0; i < va->numel(); ++i) {
            const double s = sigmoid((*va)[i]);
            d[i] = s * (1.0 + (*va)[i] * (1.0 - s));
          }
          acc_a(mul(g, d));
        }
        break;
      }
      case Op::softplus: {
        if (need_a) {
          Tensor d(va->rows(), va->cols());
          for (std::size_t i = 0; i < va->numel(); ++i) d[i] = sigmoid((*va)[i]);
          acc_a(mul(g, d));
        }
        break;
      }
      case Op::square:
        if (need_a) acc_a(mul(g, smul(*va, 2.0)));
        break;
      case Op::sqrt:
        if (need_a) acc_a(div(g, smul(n.value, 2.0)));
        break;
      case Op::sin:
        if (need_a) acc_a(mul(g, cos_(*va)));
        break;
      case Op::cos:
        if (need_a) acc_a(neg(mul(g, sin_(*va))));
        break;
      case Op::norm: {
        if (need_a) {
          const double y = n.value.scalar_value();
          acc_a(y > 0.0 ? smul(*va, g.scalar_value() / y) : Tensor(va->rows(), va->cols(), 0.0));
        }
        break;
      }
      case Op::row_norm: {
        if (need_a) {
          Tensor ga(va->rows(), va->cols(), 0.0);
          for (std::size_t r = 0; r < va->rows(); ++r) {
            const double y = n.value(r, 0);
            if (y > 0.0) {
              for (std::size_t c = 0; c < va->cols(); ++c) {
                ga(r, c) = g(r, 0) * (*va)(r, c) / y;
              }
            }
          }
          acc_a(ga);
        }
        break;
      }
      case Op::concat_rows:
        if (need_a) acc_a(slice(g, 0, va->rows(), 0, va->cols()));
        if (need_b) acc_b(slice(g, va->rows(), va->rows() + vb->rows(), 0, vb->cols()));
        break;
      case Op::concat_cols:
        if (need_a) acc_a(slice(g, 0, va->rows(), 0, va->cols()));
        if (need_b) acc_b(slice(g, 0, vb->rows(), va->cols(), va->cols() + vb->cols()));
        break;
      case Op::slice: {
        if (need_a) {
          Tensor ga(va->rows(), va->cols(), 0.0);
          const auto r0 = static_cast<std::size_t>(n.idx[0]);
          const auto c0 = static_cast<std::size_t>(n.idx[2]);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) ga(r0 + r, c0 + c) = g(r, c);
          }
          acc_a(ga);
        }
        break;
      }
      case Op::gather_rows:
        if (need_a) acc_a(scatter_rows(g, n.idx, va->rows()));
        break;
      case Op::scatter_rows:
        if (need_a) acc_a(gather_rows(g, n.idx));
        break;
      case Op::custom: {
        Tensor ga_loc, gb_loc;
        if (need_a) ga_loc = Tensor(va->rows(), va->cols(), 0.0);
        if (need_b) gb_loc = Tensor(vb->rows(), vb->cols(), 0.0);
        n.kernel->backward(g, n.value, *va, vb, need_a ? &ga_loc : nullptr,
                           need_b ? &gb_loc : nullptr);
        if (need_a) acc_a(ga_loc);
        if (need_b) acc_b(gb_loc);
        break;
      }
    }
  }

  std::vector<Tensor> grads;
  grads.reserve(wrt.size());
  for (Value v : wrt) {
    if (!v.valid() || v.tape != this) {
      throw std::invalid_argument("backward: wrt value does not belong to this tape");
    }
    Tensor& a = adj[static_cast<std::size_t>(v.id)];
    const Tensor& value = nodes_[static_cast<std::size_t>(v.id)].value;
    grads.push_back(a.numel() == 0 ? Tensor(value.rows(), value.cols(), 0.0) : std::move(a));
  }
  clear();
  return grads;
}

#define INVDES_UNARY_OP(name, opcode, kernel)                              \
  Value name(Value a) {                                                    \
    return a.tape->record(Op::opcode, a.id, -1, kernel(a.tape->val(a)));   \
  }

#define INVDES_BINARY_OP(name, opcode, kernel)                                              \
  Value name(Value a, Value b) {                                                            \
    check_same_tape(a, b, #name);                                                           \
    return a.tape->record(Op::opcode, a.id, b.id, kernel(a.tape->val(a), b.tape->val(b)));  \
  }

INVDES_BINARY_OP(add, add, add)
INVDES_BINARY_OP(sub, sub, sub)
INVDES_BINARY_OP(mul, mul, mul)
INVDES_BINARY_OP(div, div, div)
INVDES_BINARY_OP(emax, emax, emax)
INVDES_BINARY_OP(matmul, matmul, matmul)
INVDES_BINARY_OP(concat_rows, concat_rows, concat_rows)
INVDES_BINARY_OP(concat_cols, concat_cols, concat_cols)

Value smooth_max(Value a, Value b, double width) {
  check_same_tape(a, b, "smooth_max");
  return a.tape->record(Op::smax, a.id, b.id,
                        smooth_max(a.tape->val(a), b.tape->val(b), width), width);
}

Value smooth_min(Value a, Value b, double width) {
  check_same_tape(a, b, "smooth_min");
  return a.tape->record(Op::smin, a.id, b.id,
                        smooth_min(a.tape->val(a), b.tape->val(b), width), width);
}

Value smul(Value a, double c) {
  return a.tape->record(Op::smul, a.id, -1, smul(a.tape->val(a), c), c);
}

Value sadd(Value a, double c) {
  return a.tape->record(Op::sadd, a.id, -1, sadd(a.tape->val(a), c), c);
}

INVDES_UNARY_OP(neg, neg, neg)
INVDES_UNARY_OP(transpose, transpose, transpose)
INVDES_UNARY_OP(sum_all, sum, sum_all)
INVDES_UNARY_OP(sum_axis0, sum_axis0, sum_axis0)
INVDES_UNARY_OP(sum_axis1, sum_axis1, sum_axis1)
INVDES_UNARY_OP(mean_all, mean, mean_all)
INVDES_UNARY_OP(exp_, exp, exp_)
INVDES_UNARY_OP(log_, log, log_)
INVDES_UNARY_OP(tanh_, tanh, tanh_)
INVDES_UNARY_OP(silu, silu, silu)
INVDES_UNARY_OP(softplus, softplus, softplus)
INVDES_UNARY_OP(square, square, square)
INVDES_UNARY_OP(sqrt_, sqrt, sqrt_)
INVDES_UNARY_OP(sin_, sin, sin_)
INVDES_UNARY_OP(cos_, cos, cos_)
INVDES_UNARY_OP(norm_all, norm, norm_all)
INVDES_UNARY_OP(row_norm, row_norm, row_norm)

Value slice(Value a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  return a.tape->record(Op::slice, a.id, -1, slice(a.tape->val(a), r0, r1, c0, c1), 0, 0,
                        {static_cast<int>(r0), static_cast<int>(r1), static_cast<int>(c0),
                         static_cast<int>(c1)});
}

Value gather_rows(Value a, std::span<const int> idx) {
  return a.tape->record(Op::gather_rows, a.id, -1, gather_rows(a.tape->val(a), idx), 0, 0,
                        std::vector<int>(idx.begin(), idx.end()));
}

Value scatter_rows(Value a, std::span<const int> idx, std::size_t out_rows) {
  return a.tape->record(Op::scatter_rows, a.id, -1,
                        scatter_rows(a.tape->val(a), idx, out_rows), 0, 0,
                        std::vector<int>(idx.begin(), idx.end()));
}

#undef INVDES_UNARY_OP
#undef INVDES_BINARY_OP

}  // namespace invdes::ad
