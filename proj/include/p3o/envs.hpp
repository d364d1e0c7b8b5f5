#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace p3o {

class EnvError : public std::runtime_error {
 public:
  explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

// Tabular MDP with an exact policy-evaluation solver; oracle for advantage
// and objective tests.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'], rows sum to 1
  std::vector<double> reward;      // [s][a]
  double gamma = 0.99;
  std::vector<uint8_t> terminal;   // terminal states self-loop with reward 0

  double p(int s, int a, int s2) const {
    return transition[(static_cast<size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return reward[static_cast<size_t>(s) * n_actions + a]; }
  void validate() const;
};

struct ExactSolution {
  std::vector<double> V;  // [s]
  std::vector<double> Q;  // [s][a]
  std::vector<double> A;  // [s][a], A = Q - V
};

// Iterated Bellman backups for the given policy until the sup-norm change
// drops below 1e-14 (residual comfortably under 1e-12). policy is [s][a].
ExactSolution exact_solve(const TabularMDP& mdp, const std::vector<double>& policy);

struct EnvState {
  std::vector<double> obs;
  int step_count = 0;
  bool done = false;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
};

// Environments are functional: all dynamics state lives in EnvState, so a
// single instance may serve many concurrent trajectories.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual bool discrete() const = 0;
  virtual int n_actions() const = 0;   // discrete only
  virtual int action_dim() const = 0;  // continuous only
  virtual int step_cap() const = 0;
  virtual EnvState reset(uint64_t seed) const = 0;
  virtual StepResult step(const EnvState& state, std::span<const double> action) const = 0;

  StepResult step(const EnvState& state, int action) const {
    const double a = static_cast<double>(action);
    return step(state, std::span<const double>(&a, 1));
  }

 protected:
  void check_not_done(const EnvState& s) const;
};

// 5-state leftward-reset chain. Always starts at state 0; RIGHT advances,
// LEFT resets to state 0. Reward 1 on entering the terminal state. The
// observation is a one-hot state encoding. Cap 100 steps.
class ChainEnv : public Env {
 public:
  using Env::step;
  explicit ChainEnv(int n_states = 5);
  std::string name() const override { return "chain"; }
  int obs_dim() const override { return n_states_; }
  bool discrete() const override { return true; }
  int n_actions() const override { return 2; }
  int action_dim() const override { return 0; }
  int step_cap() const override { return 100; }
  EnvState reset(uint64_t seed) const override;
  StepResult step(const EnvState& state, std::span<const double> action) const override;

  int n_states() const { return n_states_; }
  TabularMDP to_tabular(double gamma) const;
  int state_of(const EnvState& s) const;

 private:
  int n_states_;
};

// Classic cart-pole with the canonical constants: gravity 9.8, cart mass
// 1.0, pole mass 0.1, half-length 0.5, force +-10, Euler dt 0.02, failure
// at |x| > 2.4 or |theta| > 12 deg, cap 500 steps, reward 1 per step.
// Initial observation components are uniform in [-0.05, 0.05].
class CartPoleEnv : public Env {
 public:
  using Env::step;
  std::string name() const override { return "pole"; }
  int obs_dim() const override { return 4; }
  bool discrete() const override { return true; }
  int n_actions() const override { return 2; }
  int action_dim() const override { return 0; }
  int step_cap() const override { return 500; }
  EnvState reset(uint64_t seed) const override;
  StepResult step(const EnvState& state, std::span<const double> action) const override;
};

// 2-D double integrator: obs [px,py,vx,vy], force clamped to [-1,1] per
// axis. Dynamics v' = friction*v + dt*f, p' = p + dt*v', with friction
// 0.95 and dt 0.1. Reward is -distance to the goal at the origin. Initial
// position uniform in [-1,1]^2, velocity 0. Cap 200 steps, no early exit.
class PointMassEnv : public Env {
 public:
  using Env::step;
  static constexpr double kDt = 0.1;
  static constexpr double kFriction = 0.95;

  std::string name() const override { return "pointmass"; }
  int obs_dim() const override { return 4; }
  bool discrete() const override { return false; }
  int n_actions() const override { return 0; }
  int action_dim() const override { return 2; }
  int step_cap() const override { return 200; }
  EnvState reset(uint64_t seed) const override;
  StepResult step(const EnvState& state, std::span<const double> action) const override;
};

// Names: chain, pole, pointmass.
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace p3o
