#pragma once

#include <span>
#include <string>
#include <vector>

#include "p3o/autodiff.hpp"
#include "p3o/distributions.hpp"
#include "p3o/rng.hpp"

namespace p3o {

struct MLPSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  enum class Activation { tanh, relu } activation = Activation::tanh;
};

// Fully connected network over autodiff tensors. forward() registers the
// parameters as bound graph leaves; forward_plain() runs the identical
// arithmetic without a tape (used for rollouts; the accumulation order
// matches the graph version bit for bit).
class Mlp {
 public:
  Mlp() = default;
  Mlp(MLPSpec spec, Rng& rng, double output_scale = 1.0);

  Graph::Id forward(Graph& g, Graph::Id input) const;
  std::vector<double> forward_plain(std::span<const double> input) const;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  const MLPSpec& spec() const { return spec_; }

 private:
  MLPSpec spec_;
  // mutable: binding as graph leaves requires non-const Tensor*; forward()
  // itself never writes.
  mutable std::vector<Tensor> weights_;
  mutable std::vector<Tensor> biases_;
};

// Policy network: MLP trunk producing logits (categorical) or means
// (gaussian, with a state-independent learned log-std vector).
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(PolicyDist::Kind kind, int obs_dim, int act_dim,
            const std::vector<int>& hidden, Rng& rng);

  PolicyDist dist(std::span<const double> obs) const;

  // Graph head over a [B, obs_dim] observation node; returns the [B, act_dim]
  // logits / mean node. For gaussians log_std_node() binds the shared vector.
  Graph::Id head(Graph& g, Graph::Id obs) const;
  Graph::Id log_std_node(Graph& g) const;

  PolicyDist::Kind kind() const { return kind_; }
  int act_dim() const { return act_dim_; }
  std::vector<Tensor*> params();

 private:
  PolicyDist::Kind kind_ = PolicyDist::Kind::categorical;
  int act_dim_ = 0;
  Mlp mlp_;
  mutable Tensor log_std_;  // [1, act_dim], gaussian only
};

class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(int obs_dim, const std::vector<int>& hidden, Rng& rng);

  double value(std::span<const double> obs) const;
  Graph::Id head(Graph& g, Graph::Id obs) const;  // [B,1]
  std::vector<Tensor*> params();

 private:
  Mlp mlp_;
};

// Differentiable distribution expressions over a batch. Parameters of the
// new policy flow through `params` nodes; everything old is constant.

// log pi(a_i | s_i) as a [B,1] node.
Graph::Id categorical_log_prob(Graph& g, Graph::Id logits, std::vector<int> actions);
Graph::Id gaussian_log_prob(Graph& g, Graph::Id mean, Graph::Id log_std,
                            const std::vector<double>& actions /* [B*D] */);

// Forward KL(old || new) per sample, [B,1]. Old distributions enter as data.
Graph::Id categorical_kl_from(Graph& g, const std::vector<PolicyDist>& old_dists,
                              Graph::Id logits);
Graph::Id gaussian_kl_from(Graph& g, const std::vector<PolicyDist>& old_dists,
                           Graph::Id mean, Graph::Id log_std);

// Entropy per sample, [B,1] (categorical) or scalar (gaussian, shared).
Graph::Id categorical_entropy(Graph& g, Graph::Id logits);
Graph::Id gaussian_entropy(Graph& g, Graph::Id log_std);

// Snapshot / restore of a parameter set (used for the rollback contract).
std::vector<std::vector<double>> snapshot_params(const std::vector<Tensor*>& params);
void restore_params(const std::vector<Tensor*>& params,
                    const std::vector<std::vector<double>>& snap);

}  // namespace p3o
