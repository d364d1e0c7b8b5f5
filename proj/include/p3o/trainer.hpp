#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "p3o/advantage.hpp"
#include "p3o/envs.hpp"
#include "p3o/networks.hpp"
#include "p3o/objectives.hpp"

namespace p3o {

class TrainerError : public std::runtime_error {
 public:
  explicit TrainerError(const std::string& what) : std::runtime_error(what) {}
};

enum class Schedule { fixed, linear_decay };
enum class Estimator { gae, nstep };
enum class DeonScope { final_epoch, all_epochs };

struct TrainConfig {
  std::string env = "pole";
  long total_steps = 300000;
  int horizon = 256;    // T
  int n_actors = 8;     // N
  int epochs = 4;       // E
  int minibatch = 64;
  double lr_policy = 2.5e-4;
  double lr_value = 2.5e-4;
  Schedule schedule = Schedule::linear_decay;
  ObjectiveConfig objective;  // see apply_env_defaults
  double gamma = 0.99;
  double gamma_v = 0.99;
  double lambda_gae = 0.95;
  Estimator estimator = Estimator::gae;
  bool normalize_adv = true;
  uint64_t seed = 0;
  int eval_every = 1;
  int eval_episodes = 4;
  DeonScope deon_scope = DeonScope::final_epoch;
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

// Per-environment defaults: the discrete column (short horizon, 8 actors,
// 4 epochs, decayed 2.5e-4 step, beta_kl 0.1, entropy 0.01) for chain and
// pole; the continuous column (T=2048, 1 actor, 10 epochs, fixed 1e-4
// step, beta_kl 1, no entropy bonus) for pointmass. Explicit settings in a
// config file override these afterwards.
TrainConfig default_config(const std::string& env);

struct MetricsRow {
  long iteration = 0;
  long env_steps = 0;
  double mean_return = 0.0;
  double eval_return = 0.0;
  double deon = 0.0;
  double cpi_value = 0.0;
  double mean_kl = 0.0;
  double entropy = 0.0;
  double lr = 0.0;
  double frac_above = 0.0;
  double frac_below = 0.0;
};

// Metric column names, in CSV order.
const std::vector<std::string>& metrics_columns();

struct History {
  std::vector<MetricsRow> rows;
};

struct Rollout {
  int n_actors = 0;
  int horizon = 0;
  int obs_dim = 0;
  int act_width = 0;  // 1 for discrete, action_dim for continuous
  // flat per-step arrays; sample index = actor * horizon + t
  std::vector<double> obs;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> old_log_probs;
  std::vector<uint8_t> dones;
  std::vector<PolicyDist> old_dists;
  std::vector<double> bootstrap;  // [n_actors], V of the state after the segment
  std::vector<double> episode_returns;  // completed during collection

  std::vector<double> raw_advantages;
  std::vector<double> advantages;  // normalized copy when enabled
  std::vector<double> value_targets;
  bool advantages_ready = false;

  long size() const { return static_cast<long>(n_actors) * horizon; }
};

// fixed -> base; linear_decay -> base*(1 - step/total), floored at 0.
double lr_schedule(long step, long total, double base, Schedule kind);

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  Rollout collect_rollouts();
  // Computes advantages and TD(0) targets, snapshots the old policy, then
  // runs E epochs of shuffled minibatch updates. On a non-finite loss the
  // iteration aborts and parameters roll back to the pre-iteration state.
  MetricsRow train_iteration(Rollout& rollout);
  History run();

  double evaluate(int episodes, uint64_t eval_seed) const;

  PolicyNet& policy() { return policy_; }
  ValueNet& value_net() { return value_; }
  const TrainConfig& config() const { return cfg_; }
  long env_steps_done() const { return env_steps_; }

 private:
  struct Actor {
    EnvState state;
    Rng rng;
    uint64_t episode = 0;
    double episode_return = 0.0;
  };

  void compute_advantages(Rollout& r) const;
  double run_minibatches(Rollout& r, MetricsRow& row);

  TrainConfig cfg_;
  std::unique_ptr<Env> env_;
  PolicyNet policy_;
  ValueNet value_;
  std::vector<AdamState> policy_opt_;
  std::vector<AdamState> value_opt_;
  std::vector<Actor> actors_;
  long env_steps_ = 0;
  long iteration_ = 0;
  double last_mean_return_ = 0.0;
  double last_eval_return_ = 0.0;
};

History run_training(const TrainConfig& cfg);

}  // namespace p3o
