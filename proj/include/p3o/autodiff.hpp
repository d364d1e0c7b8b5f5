#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace p3o {

// Dense row-major double tensor, rank 0..2. Rank 0 is a scalar (shape {},
// one element). grad is empty unless the tensor is tracked as a parameter.
using Shape = std::vector<int>;

inline long numel(const Shape& s) {
  long n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s);

struct Tensor {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  Tensor(Shape sh, std::vector<double> values);

  static Tensor zeros(const Shape& sh);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);                 // [1,n]
  static Tensor column(std::vector<double> values);              // [n,1]
  static Tensor matrix(int rows, int cols, std::vector<double> values);

  long size() const { return static_cast<long>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const;
  int cols() const;
  double value() const;  // scalar tensors only
  double& at(int i, int j);
  double at(int i, int j) const;

  void ensure_grad();
  void zero_grad();
};

class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

enum class OpKind {
  leaf,
  add,
  sub,
  mul,
  div,
  matmul,
  exp,
  log,
  sigmoid,
  tanh,
  clip,
  minimum,
  maximum,
  mean,
  sum,
  neg,
  square,
  broadcast,
  sum_rows,
  logsumexp_rows,
  gather_cols,
};

const char* op_name(OpKind k);

// Reverse-mode tape. Nodes are appended in topological order; forward()
// evaluates up to a root, backward() walks the tape in reverse. Leaves may
// be bound to external Tensors (parameters), whose grads accumulate across
// backward calls until zeroed.
class Graph {
 public:
  using Id = int;

  // Leaf bound to external storage; forward() reads param->data each time.
  Id leaf(Tensor* param);
  // Leaf owning its value (constant w.r.t. differentiation).
  Id constant(Tensor value);
  Id constant(double v) { return constant(Tensor::scalar(v)); }

  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id div(Id a, Id b);
  Id matmul(Id a, Id b);
  Id exp(Id a);
  Id log(Id a);
  Id sigmoid(Id a);
  Id tanh(Id a);
  Id clip(Id a, double lo, double hi);
  Id minimum(Id a, Id b);
  Id maximum(Id a, Id b);
  Id mean(Id a);
  Id sum(Id a);
  Id neg(Id a);
  Id square(Id a);
  Id broadcast(Id a, const Shape& target);
  Id sum_rows(Id a);
  Id logsumexp_rows(Id a);
  // Picks value[i, cols[i]] per row -> [m,1]. cols is captured by value.
  Id gather_cols(Id a, std::vector<int> cols);

  // Recomputes node values 0..root and returns the root value. Throws
  // GraphError naming the node on any non-finite intermediate.
  const Tensor& forward(Id root);

  // Accumulates d(root)/d(leaf) into every bound leaf's grad. root must be
  // scalar and already evaluated by forward().
  void backward(Id root);

  const Tensor& value(Id id) const;
  // Gradient of the last backward() at an arbitrary node (not accumulated).
  const std::vector<double>& node_grad(Id id) const;

  // Zeroes the grad of every bound leaf parameter.
  void zero_grads();

  // Mutable storage that drives a leaf's forward value (the bound parameter
  // when present, otherwise the constant itself).
  Tensor& leaf_storage(Id id);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    OpKind kind;
    Id a = -1, b = -1;
    Tensor value;
    std::vector<double> grad;
    Tensor* bound = nullptr;
    double lo = 0.0, hi = 0.0;
    std::vector<int> cols;
  };

  Id push(Node n);
  void eval_node(int i);
  void check_finite(int i) const;
  const Node& at(Id id) const;

  std::vector<Node> nodes_;
  Id evaluated_upto_ = -1;
};

// Bias-corrected Adam. step counts completed updates.
struct AdamState {
  long step = 0;
  std::vector<double> m, v;
  double alpha;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  AdamState(long n, double alpha_);
};

// One Adam update of params in the descent direction of grads. Throws on
// non-finite grads without touching params or state.
void adam_step(AdamState& state, Tensor& params, std::span<const double> grads);
void adam_step(AdamState& state, Tensor& params);  // grads = params.grad

// Max over leaf entries of |analytic - central difference| / max(1,|analytic|)
// for a scalar root. h must lie in [1e-7, 1e-4].
double finite_diff_check(Graph& g, Graph::Id root, Graph::Id leaf, double h);

}  // namespace p3o
