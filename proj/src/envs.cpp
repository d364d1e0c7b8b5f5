#include "p3o/envs.hpp"

#include <algorithm>
#include <cmath>

#include "p3o/rng.hpp"

namespace p3o {

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1) throw EnvError("empty MDP");
  if (!(gamma > 0.0 && gamma < 1.0)) throw EnvError("discount must lie in (0,1)");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double row = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) row += p(s, a, s2);
      if (std::abs(row - 1.0) > 1e-12)
        throw EnvError("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                       ") sums to " + std::to_string(row));
      if (terminal[s] && (std::abs(p(s, a, s) - 1.0) > 1e-12 || r(s, a) != 0.0))
        throw EnvError("terminal state " + std::to_string(s) + " must self-loop with reward 0");
    }
}

ExactSolution exact_solve(const TabularMDP& mdp, const std::vector<double>& policy) {
  mdp.validate();
  const int S = mdp.n_states, A = mdp.n_actions;
  if (static_cast<int>(policy.size()) != S * A) throw EnvError("policy size mismatch");
  for (int s = 0; s < S; ++s) {
    double row = 0.0;
    for (int a = 0; a < A; ++a) {
      if (policy[s * A + a] < 0.0) throw EnvError("negative policy probability");
      row += policy[s * A + a];
    }
    if (std::abs(row - 1.0) > 1e-10)
      throw EnvError("policy row " + std::to_string(s) + " sums to " + std::to_string(row));
  }

  ExactSolution sol;
  sol.V.assign(S, 0.0);
  std::vector<double> next(S, 0.0);
  for (int iter = 0; iter < 2000000; ++iter) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      if (mdp.terminal[s]) {
        next[s] = 0.0;
      } else {
        double v = 0.0;
        for (int a = 0; a < A; ++a) {
          double q = mdp.r(s, a);
          for (int s2 = 0; s2 < S; ++s2)
            q += mdp.gamma * mdp.p(s, a, s2) * sol.V[s2];
          v += policy[s * A + a] * q;
        }
        next[s] = v;
      }
      delta = std::max(delta, std::abs(next[s] - sol.V[s]));
    }
    sol.V = next;
    if (delta < 1e-14) break;
  }

  sol.Q.assign(static_cast<size_t>(S) * A, 0.0);
  sol.A.assign(static_cast<size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double q = 0.0;
      if (!mdp.terminal[s]) {
        q = mdp.r(s, a);
        for (int s2 = 0; s2 < S; ++s2) q += mdp.gamma * mdp.p(s, a, s2) * sol.V[s2];
      }
      sol.Q[s * A + a] = q;
      sol.A[s * A + a] = q - sol.V[s];
    }
  return sol;
}

void Env::check_not_done(const EnvState& s) const {
  if (s.done) throw EnvError(name() + ": step() after episode end");
}

ChainEnv::ChainEnv(int n_states) : n_states_(n_states) {
  if (n_states < 2) throw EnvError("chain needs at least 2 states");
}

int ChainEnv::state_of(const EnvState& s) const {
  for (int i = 0; i < n_states_; ++i)
    if (s.obs[i] == 1.0) return i;
  throw EnvError("chain: malformed observation");
}

EnvState ChainEnv::reset(uint64_t) const {
  EnvState s;
  s.obs.assign(n_states_, 0.0);
  s.obs[0] = 1.0;  // fixed start, seed-independent
  return s;
}

StepResult ChainEnv::step(const EnvState& state, std::span<const double> action) const {
  check_not_done(state);
  const int a = static_cast<int>(action[0]);
  if (action.size() != 1 || (a != 0 && a != 1))
    throw EnvError("chain: action must be 0 (LEFT) or 1 (RIGHT)");
  const int s = state_of(state);

  const int s2 = (a == 1) ? s + 1 : 0;
  StepResult out;
  out.reward = (a == 1 && s2 == n_states_ - 1) ? 1.0 : 0.0;
  out.state.step_count = state.step_count + 1;
  out.done = (s2 == n_states_ - 1) || (out.state.step_count >= step_cap());
  out.state.done = out.done;
  out.state.obs.assign(n_states_, 0.0);
  out.state.obs[s2] = 1.0;
  return out;
}

TabularMDP ChainEnv::to_tabular(double gamma) const {
  TabularMDP m;
  m.n_states = n_states_;
  m.n_actions = 2;
  m.gamma = gamma;
  m.transition.assign(static_cast<size_t>(n_states_) * 2 * n_states_, 0.0);
  m.reward.assign(static_cast<size_t>(n_states_) * 2, 0.0);
  m.terminal.assign(n_states_, 0);
  m.terminal[n_states_ - 1] = 1;
  auto set_p = [&](int s, int a, int s2) {
    m.transition[(static_cast<size_t>(s) * 2 + a) * n_states_ + s2] = 1.0;
  };
  for (int s = 0; s < n_states_; ++s) {
    if (m.terminal[s]) {
      set_p(s, 0, s);
      set_p(s, 1, s);
      continue;
    }
    set_p(s, 0, 0);
    set_p(s, 1, s + 1);
    if (s + 1 == n_states_ - 1) m.reward[s * 2 + 1] = 1.0;
  }
  return m;
}

EnvState CartPoleEnv::reset(uint64_t seed) const {
  Rng rng(split_seed(seed, 0xca97));
  EnvState s;
  s.obs.resize(4);
  for (double& v : s.obs) v = rng.uniform(-0.05, 0.05);
  return s;
}

StepResult CartPoleEnv::step(const EnvState& state, std::span<const double> action) const {
  check_not_done(state);
  const int a = static_cast<int>(action[0]);
  if (action.size() != 1 || (a != 0 && a != 1))
    throw EnvError("pole: action must be 0 or 1");

  constexpr double gravity = 9.8;
  constexpr double mass_cart = 1.0;
  constexpr double mass_pole = 0.1;
  constexpr double total_mass = mass_cart + mass_pole;
  constexpr double half_length = 0.5;
  constexpr double pole_mass_length = mass_pole * half_length;
  constexpr double force_mag = 10.0;
  constexpr double dt = 0.02;
  constexpr double theta_limit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  constexpr double x_limit = 2.4;

  double x = state.obs[0], x_dot = state.obs[1], theta = state.obs[2], theta_dot = state.obs[3];
  const double force = a == 1 ? force_mag : -force_mag;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (gravity * sin_t - cos_t * temp) /
                           (half_length * (4.0 / 3.0 - mass_pole * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  x += dt * x_dot;
  x_dot += dt * x_acc;
  theta += dt * theta_dot;
  theta_dot += dt * theta_acc;

  StepResult out;
  out.state.obs = {x, x_dot, theta, theta_dot};
  out.state.step_count = state.step_count + 1;
  const bool failed = std::abs(x) > x_limit || std::abs(theta) > theta_limit;
  out.done = failed || out.state.step_count >= step_cap();
  out.state.done = out.done;
  out.reward = 1.0;
  return out;
}

EnvState PointMassEnv::reset(uint64_t seed) const {
  Rng rng(split_seed(seed, 0x9035));
  EnvState s;
  s.obs = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0, 0.0};
  return s;
}

StepResult PointMassEnv::step(const EnvState& state, std::span<const double> action) const {
  check_not_done(state);
  if (action.size() != 2) throw EnvError("pointmass: action must have dimension 2");

  const double fx = std::clamp(action[0], -1.0, 1.0);
  const double fy = std::clamp(action[1], -1.0, 1.0);
  double px = state.obs[0], py = state.obs[1], vx = state.obs[2], vy = state.obs[3];
  vx = kFriction * vx + kDt * fx;
  vy = kFriction * vy + kDt * fy;
  px += kDt * vx;
  py += kDt * vy;

  StepResult out;
  out.state.obs = {px, py, vx, vy};
  out.state.step_count = state.step_count + 1;
  out.done = out.state.step_count >= step_cap();
  out.state.done = out.done;
  out.reward = -std::sqrt(px * px + py * py);
  return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "chain") return std::make_unique<ChainEnv>();
  if (name == "pole") return std::make_unique<CartPoleEnv>();
  if (name == "pointmass") return std::make_unique<PointMassEnv>();
  throw EnvError("unknown environment '" + name + "' (expected chain, pole, pointmass)");
}

}  // namespace p3o
