#include "p3o/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace p3o {

void TrainConfig::validate() const {
  if (horizon < 1 || n_actors < 1 || epochs < 0 || minibatch < 1)
    throw TrainerError("invalid loop sizes");
  const long buffer = static_cast<long>(horizon) * n_actors;
  if (buffer % minibatch != 0)
    throw TrainerError("N*T = " + std::to_string(buffer) +
                       " not divisible by minibatch " + std::to_string(minibatch));
  if (total_steps < buffer) throw TrainerError("total_steps smaller than one rollout");
  if (!(gamma > 0.0 && gamma < 1.0)) throw TrainerError("gamma must lie in (0,1)");
  if (!(gamma_v > 0.0 && gamma_v < 1.0)) throw TrainerError("gamma_v must lie in (0,1)");
  if (lambda_gae < 0.0 || lambda_gae > 1.0) throw TrainerError("lambda_gae must lie in [0,1]");
  if (lr_policy < 0.0 || lr_value < 0.0) throw TrainerError("negative step size");
  objective.validate();
}

TrainConfig default_config(const std::string& env) {
  TrainConfig cfg;
  cfg.env = env;
  if (env == "pointmass") {
    cfg.horizon = 2048;
    cfg.n_actors = 1;
    cfg.epochs = 10;
    cfg.lr_policy = 1e-4;
    cfg.lr_value = 1e-4;
    cfg.schedule = Schedule::fixed;
    cfg.objective.beta_kl = 1.0;
    cfg.objective.entropy_coef = 0.0;
    cfg.total_steps = 200000;
  } else {
    cfg.horizon = 256;
    cfg.n_actors = 8;
    cfg.epochs = 4;
    cfg.lr_policy = 2.5e-4;
    cfg.lr_value = 2.5e-4;
    cfg.schedule = Schedule::linear_decay;
    cfg.objective.beta_kl = 0.1;
    cfg.objective.entropy_coef = 0.01;
    cfg.total_steps = env == "chain" ? 50000 : 300000;
  }
  return cfg;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "iteration", "env_steps", "mean_return", "eval_return", "deon", "cpi_value",
      "mean_kl",   "entropy",   "lr",          "frac_above",  "frac_below"};
  return cols;
}

double lr_schedule(long step, long total, double base, Schedule kind) {
  if (step < 0 || step > total) throw TrainerError("lr_schedule step out of range");
  if (kind == Schedule::fixed) return base;
  const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(total);
  return base * std::max(0.0, frac);
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  env_ = make_env(cfg_.env);

  Rng init_rng(split_seed(cfg_.seed, 0x1717));
  const auto kind =
      env_->discrete() ? PolicyDist::Kind::categorical : PolicyDist::Kind::gaussian;
  const int act_dim = env_->discrete() ? env_->n_actions() : env_->action_dim();
  policy_ = PolicyNet(kind, env_->obs_dim(), act_dim, cfg_.hidden, init_rng);
  value_ = ValueNet(env_->obs_dim(), cfg_.hidden, init_rng);

  for (Tensor* p : policy_.params()) policy_opt_.emplace_back(p->size(), cfg_.lr_policy);
  for (Tensor* p : value_.params()) value_opt_.emplace_back(p->size(), cfg_.lr_value);

  actors_.reserve(cfg_.n_actors);
  for (int i = 0; i < cfg_.n_actors; ++i) {
    Actor a{EnvState{}, Rng(split_seed(cfg_.seed, 0xac7000 + i)), 0, 0.0};
    a.state = env_->reset(split_seed(cfg_.seed, (static_cast<uint64_t>(i) << 20)));
    actors_.push_back(std::move(a));
  }
}

Rollout Trainer::collect_rollouts() {
  const int T = cfg_.horizon, N = cfg_.n_actors;
  Rollout r;
  r.n_actors = N;
  r.horizon = T;
  r.obs_dim = env_->obs_dim();
  r.act_width = env_->discrete() ? 1 : env_->action_dim();
  const long n = r.size();
  r.obs.resize(n * r.obs_dim);
  r.actions.resize(n * r.act_width);
  r.rewards.resize(n);
  r.values.resize(n);
  r.old_log_probs.resize(n);
  r.dones.resize(n);
  r.old_dists.resize(n);
  r.bootstrap.assign(N, 0.0);

  for (int i = 0; i < N; ++i) {
    Actor& actor = actors_[i];
    for (int t = 0; t < T; ++t) {
      const long idx = static_cast<long>(i) * T + t;
      const auto& obs = actor.state.obs;
      std::copy(obs.begin(), obs.end(), r.obs.begin() + idx * r.obs_dim);

      PolicyDist dist = policy_.dist(obs);
      const auto action = dist.sample(actor.rng);
      r.old_log_probs[idx] = dist.log_prob(action);
      r.values[idx] = value_.value(obs);
      std::copy(action.begin(), action.end(), r.actions.begin() + idx * r.act_width);
      r.old_dists[idx] = std::move(dist);

      StepResult sr;
      try {
        sr = env_->step(actor.state, action);
      } catch (const EnvError& e) {
        throw TrainerError("actor " + std::to_string(i) + ": " + e.what());
      }
      r.rewards[idx] = sr.reward;
      r.dones[idx] = sr.done ? 1 : 0;
      actor.episode_return += sr.reward;

      if (sr.done) {
        r.episode_returns.push_back(actor.episode_return);
        actor.episode_return = 0.0;
        actor.episode += 1;
        actor.state = env_->reset(
            split_seed(cfg_.seed, (static_cast<uint64_t>(i) << 20) + actor.episode));
      } else {
        actor.state = std::move(sr.state);
      }
    }
    const long last = static_cast<long>(i) * T + (T - 1);
    r.bootstrap[i] = r.dones[last] ? 0.0 : value_.value(actors_[i].state.obs);
  }
  return r;
}

void Trainer::compute_advantages(Rollout& r) const {
  if (r.advantages_ready) throw TrainerError("advantages already computed for this rollout");
  const int T = r.horizon;
  r.raw_advantages.resize(r.size());
  r.value_targets.resize(r.size());

  for (int i = 0; i < r.n_actors; ++i) {
    const long off = static_cast<long>(i) * T;
    std::span<const double> rew(&r.rewards[off], T);
    std::span<const double> val(&r.values[off], T);
    std::span<const uint8_t> don(&r.dones[off], T);

    std::vector<double> adv =
        cfg_.estimator == Estimator::gae
            ? gae(rew, val, don, r.bootstrap[i], cfg_.gamma, cfg_.lambda_gae)
            : nstep_advantage_segments(rew, val, don, r.bootstrap[i], cfg_.gamma);
    std::copy(adv.begin(), adv.end(), r.raw_advantages.begin() + off);

    for (int t = 0; t < T; ++t) {
      const double next_v = don[t] ? 0.0 : (t + 1 < T ? val[t + 1] : r.bootstrap[i]);
      r.value_targets[off + t] = td0_target(rew[t], next_v, cfg_.gamma_v);
    }
  }

  r.advantages = r.raw_advantages;
  if (cfg_.normalize_adv) normalize_advantages(r.advantages);
  r.advantages_ready = true;
}

double Trainer::run_minibatches(Rollout& r, MetricsRow& row) {
  const long n = r.size();
  const int B = cfg_.minibatch;
  const long n_mb = n / B;
  const bool cat = policy_.kind() == PolicyDist::Kind::categorical;

  Rng shuffle_rng(split_seed(cfg_.seed, 0x5f5f0000 + static_cast<uint64_t>(iteration_)));
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);

  // metric accumulators over the scoped epochs
  double deon_acc = 0.0, cpi_acc = 0.0, kl_acc = 0.0, ent_acc = 0.0;
  double above_acc = 0.0, below_acc = 0.0;
  long scoped_mbs = 0;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    // Fisher-Yates with the iteration-scoped stream
    for (long k = n - 1; k > 0; --k) {
      const long j = static_cast<long>(shuffle_rng.next_u64() % static_cast<uint64_t>(k + 1));
      std::swap(order[k], order[j]);
    }
    const bool scoped =
        cfg_.deon_scope == DeonScope::all_epochs || epoch == cfg_.epochs - 1;

    for (long mb = 0; mb < n_mb; ++mb) {
      LossBatch batch;
      std::vector<double> obs_flat(static_cast<size_t>(B) * r.obs_dim);
      std::vector<double> raw_adv(B);
      std::vector<double> targets(B);
      batch.advantages.resize(B);
      batch.old_log_probs.resize(B);
      batch.old_dists.resize(B);
      if (cat) batch.actions_cat.resize(B);
      else batch.actions_gauss.resize(static_cast<size_t>(B) * r.act_width);

      for (int k = 0; k < B; ++k) {
        const long idx = order[mb * B + k];
        std::copy_n(r.obs.begin() + idx * r.obs_dim, r.obs_dim,
                    obs_flat.begin() + static_cast<size_t>(k) * r.obs_dim);
        batch.advantages[k] = r.advantages[idx];
        raw_adv[k] = r.raw_advantages[idx];
        batch.old_log_probs[k] = r.old_log_probs[idx];
        batch.old_dists[k] = r.old_dists[idx];
        targets[k] = r.value_targets[idx];
        if (cat)
          batch.actions_cat[k] = static_cast<int>(r.actions[idx]);
        else
          std::copy_n(r.actions.begin() + idx * r.act_width, r.act_width,
                      batch.actions_gauss.begin() + static_cast<size_t>(k) * r.act_width);
      }

      // policy update
      {
        Graph g;
        Graph::Id obs = g.constant(Tensor::matrix(B, r.obs_dim, obs_flat));
        PolicyLossNodes nodes = build_policy_loss(g, policy_, obs, batch, cfg_.objective);
        g.forward(nodes.loss);
        g.zero_grads();
        g.backward(nodes.loss);
        auto params = policy_.params();
        for (size_t p = 0; p < params.size(); ++p) adam_step(policy_opt_[p], *params[p]);

        if (scoped) {
          const auto& ratios = g.value(nodes.ratios).data;
          deon_acc = std::max(deon_acc, deon(ratios));
          cpi_acc += cpi_objective(ratios, raw_adv);
          kl_acc += g.value(nodes.mean_kl).value();
          ent_acc += g.value(nodes.entropy).value();
          const auto fr = clip_space_fraction(ratios, cfg_.objective.epsilon);
          above_acc += fr.first;
          below_acc += fr.second;
          ++scoped_mbs;
        }
      }

      // value update: vf_coef * mean((V(s) - target)^2), target constant
      {
        Graph g;
        Graph::Id obs = g.constant(Tensor::matrix(B, r.obs_dim, obs_flat));
        Graph::Id v = value_.head(g, obs);
        Graph::Id err = g.sub(v, g.constant(Tensor::column(targets)));
        Graph::Id loss = g.mul(g.constant(cfg_.objective.vf_coef), g.mean(g.square(err)));
        g.forward(loss);
        g.zero_grads();
        g.backward(loss);
        auto params = value_.params();
        for (size_t p = 0; p < params.size(); ++p) adam_step(value_opt_[p], *params[p]);
      }
    }
  }

  if (scoped_mbs > 0) {
    row.deon = deon_acc;
    row.cpi_value = cpi_acc / scoped_mbs;
    row.mean_kl = kl_acc / scoped_mbs;
    row.entropy = ent_acc / scoped_mbs;
    row.frac_above = above_acc / scoped_mbs;
    row.frac_below = below_acc / scoped_mbs;
  }
  return 0.0;
}

MetricsRow Trainer::train_iteration(Rollout& rollout) {
  compute_advantages(rollout);

  MetricsRow row;
  row.iteration = iteration_;
  row.lr = lr_schedule(env_steps_, cfg_.total_steps, cfg_.lr_policy, cfg_.schedule);

  if (!rollout.episode_returns.empty()) {
    double s = 0.0;
    for (double v : rollout.episode_returns) s += v;
    last_mean_return_ = s / static_cast<double>(rollout.episode_returns.size());
  }
  row.mean_return = last_mean_return_;

  // pre-iteration snapshot for the rollback contract
  const auto pol_snap = snapshot_params(policy_.params());
  const auto val_snap = snapshot_params(value_.params());
  const auto pol_opt_snap = policy_opt_;
  const auto val_opt_snap = value_opt_;

  for (auto& o : policy_opt_) o.alpha = row.lr;
  const double lr_v = lr_schedule(env_steps_, cfg_.total_steps, cfg_.lr_value, cfg_.schedule);
  for (auto& o : value_opt_) o.alpha = lr_v;

  if (cfg_.epochs == 0) {
    // degenerate: no updates, on-policy metrics
    row.deon = 0.0;
    row.cpi_value = std::accumulate(rollout.raw_advantages.begin(),
                                    rollout.raw_advantages.end(), 0.0) /
                    static_cast<double>(rollout.size());
    row.mean_kl = 0.0;
    double ent = 0.0;
    for (const auto& d : rollout.old_dists) ent += d.entropy();
    row.entropy = ent / static_cast<double>(rollout.size());
  } else {
    try {
      run_minibatches(rollout, row);
    } catch (const GraphError& e) {
      restore_params(policy_.params(), pol_snap);
      restore_params(value_.params(), val_snap);
      policy_opt_ = pol_opt_snap;
      value_opt_ = val_opt_snap;
      row.deon = 0.0;
      row.cpi_value = 0.0;
      row.mean_kl = 0.0;
      row.entropy = 0.0;
      // diagnostic travels with the row via the caller's logger; the
      // iteration itself is a no-op on parameters
    }
  }

  // buffer cleared: a rollout feeds exactly one iteration
  rollout = Rollout{};

  env_steps_ += static_cast<long>(cfg_.horizon) * cfg_.n_actors;
  row.env_steps = env_steps_;
  iteration_ += 1;
  return row;
}

double Trainer::evaluate(int episodes, uint64_t eval_seed) const {
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    EnvState s = env_->reset(split_seed(eval_seed, 0xe7a10000 + e));
    double ret = 0.0;
    while (!s.done) {
      const auto action = policy_.dist(s.obs).mode();
      StepResult sr = env_->step(s, action);
      ret += sr.reward;
      s = std::move(sr.state);
    }
    total += ret;
  }
  return total / episodes;
}

History Trainer::run() {
  History h;
  const long per_iter = static_cast<long>(cfg_.horizon) * cfg_.n_actors;
  const long iters = cfg_.total_steps / per_iter;
  for (long it = 0; it < iters; ++it) {
    Rollout roll = collect_rollouts();
    MetricsRow row = train_iteration(roll);
    if (cfg_.eval_every > 0 && (it % cfg_.eval_every == 0 || it == iters - 1))
      last_eval_return_ = evaluate(cfg_.eval_episodes, split_seed(cfg_.seed, 0xe57));
    row.eval_return = last_eval_return_;
    h.rows.push_back(row);
  }
  return h;
}

History run_training(const TrainConfig& cfg) {
  Trainer t(cfg);
  return t.run();
}

}  // namespace p3o
