#include "p3o/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace p3o {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape sh, std::vector<double> values)
    : shape(std::move(sh)), data(std::move(values)) {
  for (int d : shape)
    if (d < 0) throw GraphError("negative dimension in shape " + shape_str(shape));
  if (numel(shape) != static_cast<long>(data.size()))
    throw GraphError("shape " + shape_str(shape) + " does not match data length " +
                     std::to_string(data.size()));
}

Tensor Tensor::zeros(const Shape& sh) {
  return Tensor(sh, std::vector<double>(numel(sh), 0.0));
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::row(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  return Tensor({n, 1}, std::move(values));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

int Tensor::rows() const {
  if (rank() != 2) throw GraphError("rows() on rank-" + std::to_string(rank()) + " tensor");
  return shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw GraphError("cols() on rank-" + std::to_string(rank()) + " tensor");
  return shape[1];
}

double Tensor::value() const {
  if (size() != 1) throw GraphError("value() on non-scalar tensor " + shape_str(shape));
  return data[0];
}

double& Tensor::at(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }
double Tensor::at(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

void Tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(data.size(), 0.0); }

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::leaf: return "leaf";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::matmul: return "matmul";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::tanh: return "tanh";
    case OpKind::clip: return "clip";
    case OpKind::minimum: return "minimum";
    case OpKind::maximum: return "maximum";
    case OpKind::mean: return "mean";
    case OpKind::sum: return "sum";
    case OpKind::neg: return "neg";
    case OpKind::square: return "square";
    case OpKind::broadcast: return "broadcast";
    case OpKind::sum_rows: return "sum_rows";
    case OpKind::logsumexp_rows: return "logsumexp_rows";
    case OpKind::gather_cols: return "gather_cols";
  }
  return "?";
}

namespace {

std::string node_label(OpKind k, int id) {
  return std::string(op_name(k)) + "#" + std::to_string(id);
}

bool is_scalar(const Shape& s) { return numel(s) == 1 && s.empty(); }

// Shape of an elementwise binary op: equal shapes, or one rank-0 scalar.
Shape binary_shape(const Shape& a, const Shape& b, OpKind k, int id) {
  if (a == b) return a;
  if (is_scalar(a)) return b;
  if (is_scalar(b)) return a;
  throw GraphError("shape mismatch at " + node_label(k, id) + ": " + shape_str(a) +
                   " vs " + shape_str(b));
}

}  // namespace

const Graph::Node& Graph::at(Id id) const {
  if (id < 0 || id >= static_cast<Id>(nodes_.size()))
    throw GraphError("invalid node id " + std::to_string(id));
  return nodes_[id];
}

Graph::Id Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  Id id = static_cast<Id>(nodes_.size()) - 1;
  Node& node = nodes_[id];
  node.grad.assign(node.value.data.size(), 0.0);
  return id;
}

Graph::Id Graph::leaf(Tensor* param) {
  if (!param) throw GraphError("null parameter leaf");
  Node n;
  n.kind = OpKind::leaf;
  n.bound = param;
  n.value = *param;
  return push(std::move(n));
}

Graph::Id Graph::constant(Tensor value) {
  Node n;
  n.kind = OpKind::leaf;
  n.value = std::move(value);
  return push(std::move(n));
}

#define P3O_BINARY(NAME, KIND)                                              \
  Graph::Id Graph::NAME(Id a, Id b) {                                      \
    Node n;                                                                 \
    n.kind = OpKind::KIND;                                                  \
    n.a = a;                                                                \
    n.b = b;                                                                \
    n.value = Tensor::zeros(binary_shape(at(a).value.shape, at(b).value.shape, \
                                         OpKind::KIND, size()));            \
    return push(std::move(n));                                              \
  }

P3O_BINARY(add, add)
P3O_BINARY(sub, sub)
P3O_BINARY(mul, mul)
P3O_BINARY(div, div)
P3O_BINARY(minimum, minimum)
P3O_BINARY(maximum, maximum)
#undef P3O_BINARY

#define P3O_UNARY(NAME, KIND)                       \
  Graph::Id Graph::NAME(Id a) {                     \
    Node n;                                         \
    n.kind = OpKind::KIND;                          \
    n.a = a;                                        \
    n.value = Tensor::zeros(at(a).value.shape);     \
    return push(std::move(n));                      \
  }

P3O_UNARY(exp, exp)
P3O_UNARY(log, log)
P3O_UNARY(sigmoid, sigmoid)
P3O_UNARY(tanh, tanh)
P3O_UNARY(neg, neg)
P3O_UNARY(square, square)
#undef P3O_UNARY

Graph::Id Graph::matmul(Id a, Id b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows())
    throw GraphError("shape mismatch at " + node_label(OpKind::matmul, size()) + ": " +
                     shape_str(ta.shape) + " x " + shape_str(tb.shape));
  Node n;
  n.kind = OpKind::matmul;
  n.a = a;
  n.b = b;
  n.value = Tensor::zeros({ta.rows(), tb.cols()});
  return push(std::move(n));
}

Graph::Id Graph::clip(Id a, double lo, double hi) {
  if (!(lo <= hi)) throw GraphError("clip bounds reversed");
  Node n;
  n.kind = OpKind::clip;
  n.a = a;
  n.lo = lo;
  n.hi = hi;
  n.value = Tensor::zeros(at(a).value.shape);
  return push(std::move(n));
}

Graph::Id Graph::mean(Id a) {
  if (at(a).value.size() == 0)
    throw GraphError("mean of empty tensor at " + node_label(OpKind::mean, size()));
  Node n;
  n.kind = OpKind::mean;
  n.a = a;
  n.value = Tensor::scalar(0.0);
  return push(std::move(n));
}

Graph::Id Graph::sum(Id a) {
  Node n;
  n.kind = OpKind::sum;
  n.a = a;
  n.value = Tensor::scalar(0.0);
  return push(std::move(n));
}

Graph::Id Graph::broadcast(Id a, const Shape& target) {
  const Shape& src = at(a).value.shape;
  bool ok = false;
  if (numel(src) == 1 && src.empty()) ok = true;                    // scalar -> any
  else if (src.size() == 2 && target.size() == 2) {
    ok = (src[0] == 1 && src[1] == target[1]) ||                    // [1,n] -> [m,n]
         (src[1] == 1 && src[0] == target[0]) ||                    // [m,1] -> [m,n]
         src == target;
  }
  if (!ok)
    throw GraphError("cannot broadcast " + shape_str(src) + " to " + shape_str(target) +
                     " at " + node_label(OpKind::broadcast, size()));
  Node n;
  n.kind = OpKind::broadcast;
  n.a = a;
  n.value = Tensor::zeros(target);
  return push(std::move(n));
}

Graph::Id Graph::sum_rows(Id a) {
  const Tensor& t = at(a).value;
  if (t.rank() != 2)
    throw GraphError("sum_rows requires rank 2, got " + shape_str(t.shape));
  Node n;
  n.kind = OpKind::sum_rows;
  n.a = a;
  n.value = Tensor::zeros({t.rows(), 1});
  return push(std::move(n));
}

Graph::Id Graph::logsumexp_rows(Id a) {
  const Tensor& t = at(a).value;
  if (t.rank() != 2 || t.cols() < 1)
    throw GraphError("logsumexp_rows requires rank 2, got " + shape_str(t.shape));
  Node n;
  n.kind = OpKind::logsumexp_rows;
  n.a = a;
  n.value = Tensor::zeros({t.rows(), 1});
  return push(std::move(n));
}

Graph::Id Graph::gather_cols(Id a, std::vector<int> cols) {
  const Tensor& t = at(a).value;
  if (t.rank() != 2 || static_cast<int>(cols.size()) != t.rows())
    throw GraphError("gather_cols index length " + std::to_string(cols.size()) +
                     " vs rows " + std::to_string(t.shape.empty() ? -1 : t.shape[0]));
  for (int c : cols)
    if (c < 0 || c >= t.cols()) throw GraphError("gather_cols index out of range");
  Node n;
  n.kind = OpKind::gather_cols;
  n.a = a;
  n.cols = std::move(cols);
  n.value = Tensor::zeros({t.rows(), 1});
  return push(std::move(n));
}

void Graph::check_finite(int i) const {
  for (double v : nodes_[i].value.data)
    if (!std::isfinite(v))
      throw GraphError("non-finite value at node " + node_label(nodes_[i].kind, i));
}

void Graph::eval_node(int i) {
  Node& n = nodes_[i];
  auto& out = n.value.data;
  const long sz = n.value.size();

  auto binary = [&](auto f) {
    const auto& da = nodes_[n.a].value.data;
    const auto& db = nodes_[n.b].value.data;
    const bool sa = da.size() == 1 && nodes_[n.a].value.rank() == 0;
    const bool sb = db.size() == 1 && nodes_[n.b].value.rank() == 0;
    for (long k = 0; k < sz; ++k) out[k] = f(da[sa ? 0 : k], db[sb ? 0 : k]);
  };
  auto unary = [&](auto f) {
    const auto& da = nodes_[n.a].value.data;
    for (long k = 0; k < sz; ++k) out[k] = f(da[k]);
  };

  switch (n.kind) {
    case OpKind::leaf:
      if (n.bound) {
        if (n.bound->shape != n.value.shape)
          throw GraphError("bound parameter shape changed at " + node_label(n.kind, i));
        out = n.bound->data;
      }
      break;
    case OpKind::add: binary([](double a, double b) { return a + b; }); break;
    case OpKind::sub: binary([](double a, double b) { return a - b; }); break;
    case OpKind::mul: binary([](double a, double b) { return a * b; }); break;
    case OpKind::div: binary([](double a, double b) { return a / b; }); break;
    case OpKind::minimum: binary([](double a, double b) { return a <= b ? a : b; }); break;
    case OpKind::maximum: binary([](double a, double b) { return a >= b ? a : b; }); break;
    case OpKind::exp: unary([](double x) { return std::exp(x); }); break;
    case OpKind::log: unary([](double x) { return std::log(x); }); break;
    case OpKind::sigmoid: unary([](double x) { return 1.0 / (1.0 + std::exp(-x)); }); break;
    case OpKind::tanh: unary([](double x) { return std::tanh(x); }); break;
    case OpKind::neg: unary([](double x) { return -x; }); break;
    case OpKind::square: unary([](double x) { return x * x; }); break;
    case OpKind::clip:
      unary([&](double x) { return x < n.lo ? n.lo : (x > n.hi ? n.hi : x); });
      break;
    case OpKind::matmul: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      const int m = A.rows(), kk = A.cols(), p = B.cols();
      std::fill(out.begin(), out.end(), 0.0);
      for (int r = 0; r < m; ++r)
        for (int k = 0; k < kk; ++k) {
          const double a = A.data[static_cast<size_t>(r) * kk + k];
          const double* brow = &B.data[static_cast<size_t>(k) * p];
          double* orow = &out[static_cast<size_t>(r) * p];
          for (int c = 0; c < p; ++c) orow[c] += a * brow[c];
        }
      break;
    }
    case OpKind::mean: {
      const auto& da = nodes_[n.a].value.data;
      double s = 0.0;
      for (double v : da) s += v;
      out[0] = s / static_cast<double>(da.size());
      break;
    }
    case OpKind::sum: {
      const auto& da = nodes_[n.a].value.data;
      double s = 0.0;
      for (double v : da) s += v;
      out[0] = s;
      break;
    }
    case OpKind::broadcast: {
      const Tensor& src = nodes_[n.a].value;
      const int m = n.value.rows(), c = n.value.cols();
      if (src.rank() == 0) {
        std::fill(out.begin(), out.end(), src.data[0]);
      } else if (src.shape == n.value.shape) {
        out = src.data;
      } else if (src.shape[0] == 1) {
        for (int r = 0; r < m; ++r)
          std::copy(src.data.begin(), src.data.end(), out.begin() + static_cast<size_t>(r) * c);
      } else {
        for (int r = 0; r < m; ++r)
          std::fill_n(out.begin() + static_cast<size_t>(r) * c, c, src.data[r]);
      }
      break;
    }
    case OpKind::sum_rows: {
      const Tensor& src = nodes_[n.a].value;
      const int m = src.rows(), c = src.cols();
      for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int k = 0; k < c; ++k) s += src.data[static_cast<size_t>(r) * c + k];
        out[r] = s;
      }
      break;
    }
    case OpKind::logsumexp_rows: {
      const Tensor& src = nodes_[n.a].value;
      const int m = src.rows(), c = src.cols();
      for (int r = 0; r < m; ++r) {
        const double* row = &src.data[static_cast<size_t>(r) * c];
        double mx = row[0];
        for (int k = 1; k < c; ++k) mx = std::max(mx, row[k]);
        double s = 0.0;
        for (int k = 0; k < c; ++k) s += std::exp(row[k] - mx);
        out[r] = mx + std::log(s);
      }
      break;
    }
    case OpKind::gather_cols: {
      const Tensor& src = nodes_[n.a].value;
      const int c = src.cols();
      for (int r = 0; r < src.rows(); ++r)
        out[r] = src.data[static_cast<size_t>(r) * c + n.cols[r]];
      break;
    }
  }
  check_finite(i);
}

const Tensor& Graph::forward(Id root) {
  at(root);
  for (int i = 0; i <= root; ++i) eval_node(i);
  evaluated_upto_ = std::max(evaluated_upto_, root);
  return nodes_[root].value;
}

void Graph::backward(Id root) {
  at(root);
  if (root > evaluated_upto_)
    throw GraphError("backward before forward at node " + std::to_string(root));
  if (nodes_[root].value.size() != 1 || nodes_[root].value.rank() != 0)
    throw GraphError("backward root must be scalar, got shape " +
                     shape_str(nodes_[root].value.shape));

  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[root].grad[0] = 1.0;

  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    const auto& g = n.grad;
    const long sz = n.value.size();

    auto accum_binary = [&](auto fa, auto fb) {
      Node& na = nodes_[n.a];
      Node& nb = nodes_[n.b];
      const bool sa = na.value.rank() == 0;
      const bool sb = nb.value.rank() == 0;
      for (long k = 0; k < sz; ++k) {
        const double a = na.value.data[sa ? 0 : k];
        const double b = nb.value.data[sb ? 0 : k];
        na.grad[sa ? 0 : k] += fa(a, b, g[k]);
        nb.grad[sb ? 0 : k] += fb(a, b, g[k]);
      }
    };
    auto accum_unary = [&](auto f) {
      Node& na = nodes_[n.a];
      for (long k = 0; k < sz; ++k)
        na.grad[k] += f(na.value.data[k], n.value.data[k], g[k]);
    };

    switch (n.kind) {
      case OpKind::leaf:
        break;
      case OpKind::add:
        accum_binary([](double, double, double gk) { return gk; },
                     [](double, double, double gk) { return gk; });
        break;
      case OpKind::sub:
        accum_binary([](double, double, double gk) { return gk; },
                     [](double, double, double gk) { return -gk; });
        break;
      case OpKind::mul:
        accum_binary([](double, double b, double gk) { return gk * b; },
                     [](double a, double, double gk) { return gk * a; });
        break;
      case OpKind::div:
        accum_binary([](double, double b, double gk) { return gk / b; },
                     [](double a, double b, double gk) { return -gk * a / (b * b); });
        break;
      case OpKind::minimum:
        // ties route to the first argument
        accum_binary([](double a, double b, double gk) { return a <= b ? gk : 0.0; },
                     [](double a, double b, double gk) { return a <= b ? 0.0 : gk; });
        break;
      case OpKind::maximum:
        accum_binary([](double a, double b, double gk) { return a >= b ? gk : 0.0; },
                     [](double a, double b, double gk) { return a >= b ? 0.0 : gk; });
        break;
      case OpKind::exp:
        accum_unary([](double, double y, double gk) { return gk * y; });
        break;
      case OpKind::log:
        accum_unary([](double x, double, double gk) { return gk / x; });
        break;
      case OpKind::sigmoid:
        accum_unary([](double, double y, double gk) { return gk * y * (1.0 - y); });
        break;
      case OpKind::tanh:
        accum_unary([](double, double y, double gk) { return gk * (1.0 - y * y); });
        break;
      case OpKind::neg:
        accum_unary([](double, double, double gk) { return -gk; });
        break;
      case OpKind::square:
        accum_unary([](double x, double, double gk) { return 2.0 * x * gk; });
        break;
      case OpKind::clip:
        // boundary points count as interior
        accum_unary([&](double x, double, double gk) {
          return (x >= n.lo && x <= n.hi) ? gk : 0.0;
        });
        break;
      case OpKind::matmul: {
        Node& na = nodes_[n.a];
        Node& nb = nodes_[n.b];
        const int m = na.value.rows(), kk = na.value.cols(), p = nb.value.cols();
        // dA = g . B^T
        for (int r = 0; r < m; ++r)
          for (int k = 0; k < kk; ++k) {
            double s = 0.0;
            for (int c = 0; c < p; ++c)
              s += g[static_cast<size_t>(r) * p + c] * nb.value.data[static_cast<size_t>(k) * p + c];
            na.grad[static_cast<size_t>(r) * kk + k] += s;
          }
        // dB = A^T . g
        for (int k = 0; k < kk; ++k)
          for (int c = 0; c < p; ++c) {
            double s = 0.0;
            for (int r = 0; r < m; ++r)
              s += na.value.data[static_cast<size_t>(r) * kk + k] * g[static_cast<size_t>(r) * p + c];
            nb.grad[static_cast<size_t>(k) * p + c] += s;
          }
        break;
      }
      case OpKind::mean: {
        Node& na = nodes_[n.a];
        const double gk = g[0] / static_cast<double>(na.value.size());
        for (auto& v : na.grad) v += gk;
        break;
      }
      case OpKind::sum: {
        Node& na = nodes_[n.a];
        for (auto& v : na.grad) v += g[0];
        break;
      }
      case OpKind::broadcast: {
        Node& na = nodes_[n.a];
        const int m = n.value.rows(), c = n.value.cols();
        if (na.value.rank() == 0) {
          double s = 0.0;
          for (double v : g) s += v;
          na.grad[0] += s;
        } else if (na.value.shape == n.value.shape) {
          for (long k = 0; k < sz; ++k) na.grad[k] += g[k];
        } else if (na.value.shape[0] == 1) {
          for (int r = 0; r < m; ++r)
            for (int k = 0; k < c; ++k) na.grad[k] += g[static_cast<size_t>(r) * c + k];
        } else {
          for (int r = 0; r < m; ++r) {
            double s = 0.0;
            for (int k = 0; k < c; ++k) s += g[static_cast<size_t>(r) * c + k];
            na.grad[r] += s;
          }
        }
        break;
      }
      case OpKind::sum_rows: {
        Node& na = nodes_[n.a];
        const int m = na.value.rows(), c = na.value.cols();
        for (int r = 0; r < m; ++r)
          for (int k = 0; k < c; ++k) na.grad[static_cast<size_t>(r) * c + k] += g[r];
        break;
      }
      case OpKind::logsumexp_rows: {
        Node& na = nodes_[n.a];
        const int m = na.value.rows(), c = na.value.cols();
        for (int r = 0; r < m; ++r)
          for (int k = 0; k < c; ++k) {
            const double soft =
                std::exp(na.value.data[static_cast<size_t>(r) * c + k] - n.value.data[r]);
            na.grad[static_cast<size_t>(r) * c + k] += g[r] * soft;
          }
        break;
      }
      case OpKind::gather_cols: {
        Node& na = nodes_[n.a];
        const int c = na.value.cols();
        for (int r = 0; r < na.value.rows(); ++r)
          na.grad[static_cast<size_t>(r) * c + n.cols[r]] += g[r];
        break;
      }
    }
  }

  for (Node& n : nodes_) {
    if (n.kind == OpKind::leaf && n.bound) {
      n.bound->ensure_grad();
      for (size_t k = 0; k < n.grad.size(); ++k) n.bound->grad[k] += n.grad[k];
    }
  }
}

const Tensor& Graph::value(Id id) const { return at(id).value; }

const std::vector<double>& Graph::node_grad(Id id) const { return at(id).grad; }

void Graph::zero_grads() {
  for (Node& n : nodes_)
    if (n.kind == OpKind::leaf && n.bound) n.bound->zero_grad();
}

Tensor& Graph::leaf_storage(Id id) {
  at(id);
  Node& n = nodes_[id];
  if (n.kind != OpKind::leaf) throw GraphError("leaf_storage on non-leaf node");
  return n.bound ? *n.bound : n.value;
}

AdamState::AdamState(long n, double alpha_)
    : m(static_cast<size_t>(n), 0.0), v(static_cast<size_t>(n), 0.0), alpha(alpha_) {}

void adam_step(AdamState& state, Tensor& params, std::span<const double> grads) {
  if (grads.size() != params.data.size() || state.m.size() != params.data.size())
    throw GraphError("adam_step size mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw GraphError("non-finite gradient in adam_step");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t k = 0; k < grads.size(); ++k) {
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * grads[k];
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * grads[k] * grads[k];
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    params.data[k] -= state.alpha * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void adam_step(AdamState& state, Tensor& params) {
  if (params.grad.size() != params.data.size())
    throw GraphError("adam_step: parameter has no gradient");
  adam_step(state, params, params.grad);
}

double finite_diff_check(Graph& g, Graph::Id root, Graph::Id leaf, double h) {
  if (!(h >= 1e-7 && h <= 1e-4))
    throw GraphError("finite_diff_check step h out of [1e-7, 1e-4]");
  // Analytic gradient of this graph alone.
  g.forward(root);
  g.backward(root);
  const std::vector<double> analytic = g.node_grad(leaf);

  Tensor& target = g.leaf_storage(leaf);
  double worst = 0.0;
  for (size_t k = 0; k < target.data.size(); ++k) {
    double* slot = &target.data[k];
    const double saved = *slot;

    auto eval_at = [&](double x) {
      *slot = x;
      double y = g.forward(root).value();
      return y;
    };
    const double fp = eval_at(saved + h);
    const double fm = eval_at(saved - h);
    *slot = saved;
    g.forward(root);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw GraphError("non-finite perturbation in finite_diff_check");
    const double numeric = (fp - fm) / (2.0 * h);
    const double err = std::abs(analytic[k] - numeric) / std::max(1.0, std::abs(analytic[k]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace p3o
