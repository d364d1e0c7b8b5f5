#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "p3o/autodiff.hpp"
#include "p3o/distributions.hpp"
#include "p3o/networks.hpp"

namespace p3o {

class ObjectiveError : public std::runtime_error {
 public:
  explicit ObjectiveError(const std::string& what) : std::runtime_error(what) {}
};

// Objective zoo selector. p3o_s swaps the sigmoid preconditioner for the
// identity (CPI term, KL kept); p3o_k keeps the sigmoid and drops the KL
// term; p3o_sk drops both and reduces to the plain CPI/TRPO objective.
enum class Variant { cpi, ppo, p3o, p3o_s, p3o_k, p3o_sk };

Variant variant_from_string(const std::string& name);
std::string variant_name(Variant v);

struct ObjectiveConfig {
  Variant variant = Variant::p3o;
  double tau = 4.0;
  double epsilon = 0.2;
  double beta_kl = 1.0;
  double beta_s = 1.0;
  double entropy_coef = 0.0;
  double vf_coef = 1.0;

  bool uses_sigmoid() const { return variant == Variant::p3o || variant == Variant::p3o_k; }
  bool uses_kl() const { return variant == Variant::p3o || variant == Variant::p3o_s; }
  void validate() const;
};

struct ObjectiveReport {
  double loss = 0.0;       // minimized by the trainer (policy part)
  double cpi_value = 0.0;  // unmodified CPI objective on the batch
  double mean_kl = 0.0;
  double mean_entropy = 0.0;
  double deon = 0.0;
  double frac_above = 0.0;  // r > 1+eps
  double frac_below = 0.0;  // r < 1-eps
};

// --- scalar objective values ------------------------------------------------

// mean(r * A); ratios must be positive (they come from exp of a log ratio).
double cpi_objective(std::span<const double> ratios, std::span<const double> advantages);

// mean(min(r*A, clip(r,1-eps,1+eps)*A))
double ppo_objective(std::span<const double> ratios, std::span<const double> advantages,
                     double epsilon);

// mean(sigmoid(tau*(r-1)) * (4/tau) * A)
double scopic_objective(std::span<const double> ratios, std::span<const double> advantages,
                        double tau);

// 4*p*(1-p) with p = sigmoid(tau*(r-1)); the per-sample ratio of the Scopic
// gradient to the CPI gradient in r.
double precond_factor(double r, double tau);

// max |r - 1| over the batch.
double deon(std::span<const double> ratios);

// fractions of the batch with r > 1+eps and r < 1-eps.
std::pair<double, double> clip_space_fraction(std::span<const double> ratios, double epsilon);

// --- differentiable loss ----------------------------------------------------

// Inputs to one policy-loss evaluation. Old quantities are frozen data from
// rollout time; the new distribution parameters enter as graph nodes.
struct LossBatch {
  std::vector<int> actions_cat;         // categorical
  std::vector<double> actions_gauss;    // gaussian, [B*D]
  std::vector<double> advantages;       // [B]
  std::vector<double> old_log_probs;    // [B]
  std::vector<PolicyDist> old_dists;    // [B]
};

struct PolicyLossNodes {
  Graph::Id loss = -1;      // scalar to minimize
  Graph::Id ratios = -1;    // [B,1]
  Graph::Id mean_kl = -1;   // scalar
  Graph::Id entropy = -1;   // scalar (mean over batch)
};

// Builds -(policy objective) per the variant:
//   p3o family: beta_s * scopic_term - beta_kl * mean KL + entropy_coef * H
//   cpi / ppo:  objective + entropy_coef * H
// The value loss lives in a separate graph (see trainer).
PolicyLossNodes build_policy_loss(Graph& g, const PolicyNet& policy, Graph::Id obs,
                                  const LossBatch& batch, const ObjectiveConfig& cfg);

// Single-shot evaluation: runs a forward pass on a fresh graph and fills
// every report field from the batch.
ObjectiveReport p3o_loss(const PolicyNet& policy, const std::vector<double>& obs_flat,
                         const LossBatch& batch, const ObjectiveConfig& cfg);

}  // namespace p3o
