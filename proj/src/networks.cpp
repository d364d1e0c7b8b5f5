#include "p3o/networks.hpp"

#include <cmath>

namespace p3o {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kLog2PiE = 2.8378770664093454835606594728112;
}  // namespace

Mlp::Mlp(MLPSpec spec, Rng& rng, double output_scale) : spec_(std::move(spec)) {
  if (spec_.input < 1 || spec_.output < 1)
    throw GraphError("MLP sizes must be >= 1");
  for (int h : spec_.hidden)
    if (h < 1) throw GraphError("MLP sizes must be >= 1");

  std::vector<int> dims;
  dims.push_back(spec_.input);
  for (int h : spec_.hidden) dims.push_back(h);
  dims.push_back(spec_.output);

  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const bool last = l + 2 == dims.size();
    double scale = std::sqrt(6.0 / (fan_in + fan_out));
    if (last) scale *= output_scale;
    Tensor w = Tensor::zeros({fan_in, fan_out});
    for (double& v : w.data) v = rng.uniform(-scale, scale);
    weights_.push_back(std::move(w));
    biases_.push_back(Tensor::zeros({1, fan_out}));
  }
}

Graph::Id Mlp::forward(Graph& g, Graph::Id input) const {
  Graph::Id x = input;
  const int batch = g.value(input).rows();
  for (size_t l = 0; l < weights_.size(); ++l) {
    Graph::Id wx = g.matmul(x, g.leaf(&weights_[l]));
    Graph::Id b = g.broadcast(g.leaf(&biases_[l]), {batch, biases_[l].cols()});
    x = g.add(wx, b);
    if (l + 1 < weights_.size()) {
      x = spec_.activation == MLPSpec::Activation::tanh ? g.tanh(x)
                                                        : g.maximum(x, g.constant(0.0));
    }
  }
  return x;
}

std::vector<double> Mlp::forward_plain(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != spec_.input)
    throw GraphError("forward_plain input size mismatch");
  std::vector<double> x(input.begin(), input.end());
  for (size_t l = 0; l < weights_.size(); ++l) {
    const Tensor& W = weights_[l];
    const Tensor& b = biases_[l];
    const int in = W.rows(), out = W.cols();
    // same accumulation order as the graph matmul: k ascending
    std::vector<double> y(b.data);
    for (int k = 0; k < in; ++k) {
      const double xv = x[k];
      const double* wrow = &W.data[static_cast<size_t>(k) * out];
      for (int j = 0; j < out; ++j) y[j] += xv * wrow[j];
    }
    if (l + 1 < weights_.size()) {
      for (double& v : y)
        v = spec_.activation == MLPSpec::Activation::tanh ? std::tanh(v)
                                                          : (v >= 0.0 ? v : 0.0);
    }
    x = std::move(y);
  }
  return x;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (auto& w : weights_) out.push_back(&w);
  for (auto& b : biases_) out.push_back(&b);
  return out;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> out;
  for (auto& w : weights_) out.push_back(&w);
  for (auto& b : biases_) out.push_back(&b);
  return out;
}

PolicyNet::PolicyNet(PolicyDist::Kind kind, int obs_dim, int act_dim,
                     const std::vector<int>& hidden, Rng& rng)
    : kind_(kind), act_dim_(act_dim) {
  MLPSpec spec;
  spec.input = obs_dim;
  spec.hidden = hidden;
  spec.output = act_dim;
  // near-uniform initial policy
  mlp_ = Mlp(spec, rng, 0.01);
  if (kind_ == PolicyDist::Kind::gaussian) log_std_ = Tensor::zeros({1, act_dim});
}

PolicyDist PolicyNet::dist(std::span<const double> obs) const {
  auto out = mlp_.forward_plain(obs);
  if (kind_ == PolicyDist::Kind::categorical) return PolicyDist::categorical(std::move(out));
  return PolicyDist::gaussian(std::move(out), log_std_.data);
}

Graph::Id PolicyNet::head(Graph& g, Graph::Id obs) const { return mlp_.forward(g, obs); }

Graph::Id PolicyNet::log_std_node(Graph& g) const {
  if (kind_ != PolicyDist::Kind::gaussian)
    throw GraphError("log_std_node on categorical policy");
  return g.leaf(&log_std_);
}

std::vector<Tensor*> PolicyNet::params() {
  auto out = mlp_.params();
  if (kind_ == PolicyDist::Kind::gaussian) out.push_back(&log_std_);
  return out;
}

ValueNet::ValueNet(int obs_dim, const std::vector<int>& hidden, Rng& rng) {
  MLPSpec spec;
  spec.input = obs_dim;
  spec.hidden = hidden;
  spec.output = 1;
  mlp_ = Mlp(spec, rng, 1.0);
}

double ValueNet::value(std::span<const double> obs) const { return mlp_.forward_plain(obs)[0]; }

Graph::Id ValueNet::head(Graph& g, Graph::Id obs) const { return mlp_.forward(g, obs); }

std::vector<Tensor*> ValueNet::params() { return mlp_.params(); }

Graph::Id categorical_log_prob(Graph& g, Graph::Id logits, std::vector<int> actions) {
  Graph::Id lse = g.logsumexp_rows(logits);
  Graph::Id picked = g.gather_cols(logits, std::move(actions));
  return g.sub(picked, lse);
}

Graph::Id gaussian_log_prob(Graph& g, Graph::Id mean, Graph::Id log_std,
                            const std::vector<double>& actions) {
  const int batch = g.value(mean).rows();
  const int dim = g.value(mean).cols();
  Graph::Id acts = g.constant(Tensor::matrix(batch, dim, actions));
  Graph::Id ls = g.broadcast(log_std, {batch, dim});
  Graph::Id z = g.mul(g.sub(acts, mean), g.exp(g.neg(ls)));
  Graph::Id quad = g.mul(g.constant(-0.5), g.sum_rows(g.square(z)));
  Graph::Id ls_sum = g.broadcast(g.sum(log_std), {batch, 1});
  Graph::Id norm = g.constant(0.5 * kLog2Pi * dim);
  return g.sub(g.sub(quad, ls_sum), norm);
}

Graph::Id categorical_kl_from(Graph& g, const std::vector<PolicyDist>& old_dists,
                              Graph::Id logits) {
  const int batch = g.value(logits).rows();
  const int dim = g.value(logits).cols();
  std::vector<double> p_old(static_cast<size_t>(batch) * dim);
  std::vector<double> neg_h_old(batch, 0.0);  // sum p log p per row
  for (int i = 0; i < batch; ++i) {
    const auto p = old_dists[i].probs();
    for (int k = 0; k < dim; ++k) {
      p_old[static_cast<size_t>(i) * dim + k] = p[k];
      if (p[k] > 0.0) neg_h_old[i] += p[k] * std::log(p[k]);
    }
  }
  Graph::Id lsm = g.sub(logits, g.broadcast(g.logsumexp_rows(logits), {batch, dim}));
  Graph::Id cross = g.sum_rows(g.mul(g.constant(Tensor::matrix(batch, dim, p_old)), lsm));
  return g.sub(g.constant(Tensor::column(neg_h_old)), cross);
}

Graph::Id gaussian_kl_from(Graph& g, const std::vector<PolicyDist>& old_dists,
                           Graph::Id mean, Graph::Id log_std) {
  const int batch = g.value(mean).rows();
  const int dim = g.value(mean).cols();
  std::vector<double> mu_old(static_cast<size_t>(batch) * dim);
  std::vector<double> var_old(static_cast<size_t>(batch) * dim);
  std::vector<double> ls_old_sum(batch, 0.0);
  for (int i = 0; i < batch; ++i)
    for (int k = 0; k < dim; ++k) {
      mu_old[static_cast<size_t>(i) * dim + k] = old_dists[i].mean[k];
      var_old[static_cast<size_t>(i) * dim + k] = std::exp(2.0 * old_dists[i].log_std[k]);
      if (k == 0)
        for (int j = 0; j < dim; ++j) ls_old_sum[i] += old_dists[i].log_std[j];
    }

  Graph::Id ls_new = g.broadcast(log_std, {batch, dim});
  Graph::Id inv_var_new = g.exp(g.mul(g.constant(-2.0), ls_new));
  Graph::Id dm2 = g.square(g.sub(g.constant(Tensor::matrix(batch, dim, mu_old)), mean));
  Graph::Id num = g.add(g.constant(Tensor::matrix(batch, dim, var_old)), dm2);
  Graph::Id quad = g.mul(g.constant(0.5), g.sum_rows(g.mul(num, inv_var_new)));
  Graph::Id ls_new_sum = g.broadcast(g.sum(log_std), {batch, 1});
  Graph::Id ls_diff = g.sub(ls_new_sum, g.constant(Tensor::column(ls_old_sum)));
  return g.sub(g.add(ls_diff, quad), g.constant(0.5 * dim));
}

Graph::Id categorical_entropy(Graph& g, Graph::Id logits) {
  const int batch = g.value(logits).rows();
  const int dim = g.value(logits).cols();
  Graph::Id lsm = g.sub(logits, g.broadcast(g.logsumexp_rows(logits), {batch, dim}));
  return g.neg(g.sum_rows(g.mul(g.exp(lsm), lsm)));
}

Graph::Id gaussian_entropy(Graph& g, Graph::Id log_std) {
  const int dim = g.value(log_std).cols();
  return g.add(g.sum(log_std), g.constant(0.5 * kLog2PiE * dim));
}

std::vector<std::vector<double>> snapshot_params(const std::vector<Tensor*>& params) {
  std::vector<std::vector<double>> snap;
  snap.reserve(params.size());
  for (const Tensor* p : params) snap.push_back(p->data);
  return snap;
}

void restore_params(const std::vector<Tensor*>& params,
                    const std::vector<std::vector<double>>& snap) {
  if (params.size() != snap.size()) throw GraphError("restore_params size mismatch");
  for (size_t i = 0; i < params.size(); ++i) params[i]->data = snap[i];
}

}  // namespace p3o
