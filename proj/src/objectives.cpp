#include "p3o/objectives.hpp"

#include <cmath>
#include <tuple>

namespace p3o {

Variant variant_from_string(const std::string& name) {
  if (name == "cpi") return Variant::cpi;
  if (name == "ppo") return Variant::ppo;
  if (name == "p3o") return Variant::p3o;
  if (name == "p3o_s") return Variant::p3o_s;
  if (name == "p3o_k") return Variant::p3o_k;
  if (name == "p3o_sk") return Variant::p3o_sk;
  throw ObjectiveError("unknown variant '" + name + "'");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::cpi: return "cpi";
    case Variant::ppo: return "ppo";
    case Variant::p3o: return "p3o";
    case Variant::p3o_s: return "p3o_s";
    case Variant::p3o_k: return "p3o_k";
    case Variant::p3o_sk: return "p3o_sk";
  }
  return "?";
}

void ObjectiveConfig::validate() const {
  if (!(tau > 0.0)) throw ObjectiveError("tau must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ObjectiveError("epsilon must lie in (0,1)");
  if (beta_kl < 0.0 || entropy_coef < 0.0 || vf_coef < 0.0)
    throw ObjectiveError("coefficients must be >= 0");
}

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_batch(std::span<const double> ratios, std::span<const double> advantages) {
  if (ratios.empty()) throw ObjectiveError("empty batch");
  if (ratios.size() != advantages.size()) throw ObjectiveError("batch length mismatch");
  for (double r : ratios)
    if (!(r > 0.0))
      throw ObjectiveError("non-positive importance sampling ratio " + std::to_string(r));
}
}  // namespace

double cpi_objective(std::span<const double> ratios, std::span<const double> advantages) {
  check_batch(ratios, advantages);
  double s = 0.0;
  for (size_t i = 0; i < ratios.size(); ++i) s += ratios[i] * advantages[i];
  return s / static_cast<double>(ratios.size());
}

double ppo_objective(std::span<const double> ratios, std::span<const double> advantages,
                     double epsilon) {
  check_batch(ratios, advantages);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ObjectiveError("epsilon must lie in (0,1)");
  double s = 0.0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    const double r = ratios[i];
    const double clipped = r < 1.0 - epsilon ? 1.0 - epsilon : (r > 1.0 + epsilon ? 1.0 + epsilon : r);
    s += std::min(r * advantages[i], clipped * advantages[i]);
  }
  return s / static_cast<double>(ratios.size());
}

double scopic_objective(std::span<const double> ratios, std::span<const double> advantages,
                        double tau) {
  check_batch(ratios, advantages);
  if (!(tau > 0.0)) throw ObjectiveError("tau must be > 0");
  double s = 0.0;
  for (size_t i = 0; i < ratios.size(); ++i)
    s += sigmoid(tau * (ratios[i] - 1.0)) * (4.0 / tau) * advantages[i];
  return s / static_cast<double>(ratios.size());
}

double precond_factor(double r, double tau) {
  if (!(tau > 0.0)) throw ObjectiveError("tau must be > 0");
  const double p = sigmoid(tau * (r - 1.0));
  return 4.0 * p * (1.0 - p);
}

double deon(std::span<const double> ratios) {
  if (ratios.empty()) throw ObjectiveError("deon of empty batch");
  double y = 0.0;
  for (double r : ratios) y = std::max(y, std::abs(r - 1.0));
  return y;
}

std::pair<double, double> clip_space_fraction(std::span<const double> ratios, double epsilon) {
  if (ratios.empty()) throw ObjectiveError("clip_space_fraction of empty batch");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ObjectiveError("epsilon must lie in (0,1)");
  long above = 0, below = 0;
  for (double r : ratios) {
    if (r > 1.0 + epsilon) ++above;
    if (r < 1.0 - epsilon) ++below;
  }
  const double n = static_cast<double>(ratios.size());
  return {above / n, below / n};
}

PolicyLossNodes build_policy_loss(Graph& g, const PolicyNet& policy, Graph::Id obs,
                                  const LossBatch& batch, const ObjectiveConfig& cfg) {
  cfg.validate();
  const int B = g.value(obs).rows();
  const bool cat = policy.kind() == PolicyDist::Kind::categorical;
  for (const auto& od : batch.old_dists)
    if (od.kind != policy.kind())
      throw ObjectiveError("old/new distribution kind mismatch");

  Graph::Id head = policy.head(g, obs);
  Graph::Id log_std = cat ? -1 : policy.log_std_node(g);

  Graph::Id new_lp = cat ? categorical_log_prob(g, head, batch.actions_cat)
                         : gaussian_log_prob(g, head, log_std, batch.actions_gauss);
  Graph::Id old_lp = g.constant(Tensor::column(batch.old_log_probs));
  Graph::Id ratios = g.exp(g.sub(new_lp, old_lp));
  Graph::Id adv = g.constant(Tensor::column(batch.advantages));

  Graph::Id term;  // per-sample surrogate, [B,1]
  switch (cfg.variant) {
    case Variant::ppo: {
      Graph::Id unclipped = g.mul(ratios, adv);
      Graph::Id clipped = g.mul(g.clip(ratios, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon), adv);
      term = g.minimum(unclipped, clipped);
      break;
    }
    case Variant::cpi:
    case Variant::p3o_s:
    case Variant::p3o_sk:
      term = g.mul(ratios, adv);
      break;
    case Variant::p3o:
    case Variant::p3o_k: {
      Graph::Id shifted = g.mul(g.constant(cfg.tau), g.sub(ratios, g.constant(1.0)));
      term = g.mul(g.sigmoid(shifted), g.mul(g.constant(4.0 / cfg.tau), adv));
      break;
    }
  }

  PolicyLossNodes out;
  out.ratios = ratios;

  Graph::Id kl_per = cat ? categorical_kl_from(g, batch.old_dists, head)
                         : gaussian_kl_from(g, batch.old_dists, head, log_std);
  out.mean_kl = g.mean(kl_per);
  out.entropy = cat ? g.mean(categorical_entropy(g, head)) : gaussian_entropy(g, log_std);

  const bool scopic_family = cfg.variant == Variant::p3o || cfg.variant == Variant::p3o_s ||
                             cfg.variant == Variant::p3o_k || cfg.variant == Variant::p3o_sk;
  Graph::Id objective = g.mean(term);
  if (scopic_family) objective = g.mul(g.constant(cfg.beta_s), objective);
  if (scopic_family && cfg.uses_kl() && cfg.beta_kl > 0.0)
    objective = g.sub(objective, g.mul(g.constant(cfg.beta_kl), out.mean_kl));
  if (cfg.entropy_coef > 0.0)
    objective = g.add(objective, g.mul(g.constant(cfg.entropy_coef), out.entropy));
  out.loss = g.neg(objective);
  (void)B;
  return out;
}

ObjectiveReport p3o_loss(const PolicyNet& policy, const std::vector<double>& obs_flat,
                         const LossBatch& batch, const ObjectiveConfig& cfg) {
  const int B = static_cast<int>(batch.advantages.size());
  const int obs_dim = B > 0 ? static_cast<int>(obs_flat.size()) / B : 0;
  Graph g;
  Graph::Id obs = g.constant(Tensor::matrix(B, obs_dim, obs_flat));
  PolicyLossNodes nodes = build_policy_loss(g, policy, obs, batch, cfg);
  g.forward(nodes.loss);

  ObjectiveReport rep;
  rep.loss = g.value(nodes.loss).value();
  rep.mean_kl = g.value(nodes.mean_kl).value();
  rep.mean_entropy = g.value(nodes.entropy).value();
  const auto& r = g.value(nodes.ratios).data;
  rep.cpi_value = cpi_objective(r, batch.advantages);
  rep.deon = deon(r);
  std::tie(rep.frac_above, rep.frac_below) = clip_space_fraction(r, cfg.epsilon);
  return rep;
}

}  // namespace p3o
