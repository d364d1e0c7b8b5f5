#include <cmath>
#include <doctest.h>

#include "p3o/envs.hpp"
#include "p3o/rng.hpp"

using namespace p3o;

TEST_CASE("reset determinism and documented init ranges") {
  SUBCASE("same seed twice gives identical observations") {
    for (const char* name : {"chain", "pole", "pointmass"}) {
      auto env = make_env(name);
      CHECK(env->reset(123).obs == env->reset(123).obs);
    }
  }

  SUBCASE("chain always starts at state 0") {
    ChainEnv env;
    for (uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      const EnvState s = env.reset(seed);
      CHECK(s.obs[0] == 1.0);
      CHECK(env.state_of(s) == 0);
      CHECK(s.step_count == 0);
    }
  }

  SUBCASE("pole initial components in [-0.05, 0.05]") {
    CartPoleEnv env;
    for (uint64_t seed = 0; seed < 50; ++seed)
      for (double v : env.reset(seed).obs) {
        CHECK(v >= -0.05);
        CHECK(v <= 0.05);
      }
  }
}

TEST_CASE("step dynamics") {
  SUBCASE("chain transitions by construction") {
    ChainEnv env(3);
    EnvState s0 = env.reset(0);
    StepResult r1 = env.step(s0, 1);
    CHECK(env.state_of(r1.state) == 1);
    CHECK(r1.reward == 0.0);
    CHECK_FALSE(r1.done);

    // from the pre-terminal state, RIGHT enters the terminal with reward 1
    StepResult r2 = env.step(r1.state, 1);
    CHECK(r2.reward == 1.0);
    CHECK(r2.done);

    CHECK_THROWS_AS(env.step(r2.state, 1), EnvError);  // step after done
    CHECK_THROWS_AS(env.step(s0, 7), EnvError);        // out-of-range action
  }

  SUBCASE("chain LEFT resets to state 0") {
    ChainEnv env;
    EnvState s = env.reset(0);
    s = env.step(s, 1).state;
    s = env.step(s, 1).state;
    CHECK(env.state_of(s) == 2);
    s = env.step(s, 0).state;
    CHECK(env.state_of(s) == 0);
  }

  SUBCASE("pointmass zero force: position fixed from rest, velocity decays") {
    PointMassEnv env;
    EnvState s = env.reset(3);
    const std::vector<double> zero{0.0, 0.0};
    StepResult r = env.step(s, zero);
    CHECK(r.state.obs[0] == s.obs[0]);
    CHECK(r.state.obs[1] == s.obs[1]);
    // documented linear dynamics, one step from a moving state
    EnvState moving = s;
    moving.obs[2] = 0.8;
    moving.obs[3] = -0.4;
    StepResult r2 = env.step(moving, zero);
    CHECK(r2.state.obs[2] == doctest::Approx(PointMassEnv::kFriction * 0.8).epsilon(1e-15));
    CHECK(r2.state.obs[3] == doctest::Approx(PointMassEnv::kFriction * -0.4).epsilon(1e-15));
  }

  SUBCASE("pole episodes end within the step cap") {
    CartPoleEnv env;
    Rng rng(5);
    for (int ep = 0; ep < 5; ++ep) {
      EnvState s = env.reset(ep);
      int steps = 0;
      while (!s.done) {
        s = env.step(s, static_cast<int>(rng.next_u64() % 2)).state;
        ++steps;
        REQUIRE(steps <= env.step_cap());
      }
    }
  }

  SUBCASE("seeded trajectory reproducibility") {
    CartPoleEnv env;
    auto run = [&](uint64_t seed) {
      EnvState s = env.reset(seed);
      std::vector<double> trace;
      Rng rng(seed);
      while (!s.done) {
        StepResult r = env.step(s, static_cast<int>(rng.next_u64() % 2));
        trace.insert(trace.end(), r.state.obs.begin(), r.state.obs.end());
        s = r.state;
      }
      return trace;
    };
    CHECK(run(11) == run(11));
  }
}

TEST_CASE("exact_solve") {
  SUBCASE("2-state chain: one step to terminal") {
    ChainEnv env(2);
    TabularMDP mdp = env.to_tabular(0.99);
    std::vector<double> policy{0.0, 1.0, 0.5, 0.5};  // always RIGHT from s0
    ExactSolution sol = exact_solve(mdp, policy);
    CHECK(sol.V[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("length-n chain discounting identity") {
    // n transitions (n+1 states), reward 1 on the last: V(s0) = gamma^{n-1}
    for (int n : {2, 3, 4, 6}) {
      ChainEnv env(n + 1);
      TabularMDP mdp = env.to_tabular(0.97);
      std::vector<double> policy(static_cast<size_t>(n + 1) * 2, 0.0);
      for (int s = 0; s <= n; ++s) policy[s * 2 + 1] = 1.0;
      ExactSolution sol = exact_solve(mdp, policy);
      CHECK(sol.V[0] == doctest::Approx(std::pow(0.97, n - 1)).epsilon(1e-12));
    }
  }

  SUBCASE("Bellman fixed point and advantage identities") {
    ChainEnv env;
    TabularMDP mdp = env.to_tabular(0.99);
    std::vector<double> policy(10, 0.5);
    ExactSolution sol = exact_solve(mdp, policy);

    // one more backup moves V by < 1e-10
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      double v = 0.0;
      for (int a = 0; a < 2; ++a) {
        double q = mdp.r(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2)
          q += mdp.gamma * mdp.p(s, a, s2) * sol.V[s2];
        v += policy[s * 2 + a] * q;
      }
      CHECK(std::abs(v - sol.V[s]) < 1e-10);
    }

    for (int s = 0; s < mdp.n_states; ++s) {
      double qa = 0.0, aa = 0.0;
      for (int a = 0; a < 2; ++a) {
        CHECK(sol.A[s * 2 + a] == sol.Q[s * 2 + a] - sol.V[s]);
        qa += policy[s * 2 + a] * sol.Q[s * 2 + a];
        aa += policy[s * 2 + a] * sol.A[s * 2 + a];
      }
      CHECK(std::abs(qa - sol.V[s]) < 1e-10);
      CHECK(std::abs(aa) < 1e-10);
    }
  }

  SUBCASE("uniform policy matches a Monte-Carlo oracle") {
    // 3-state leftward-reset chain, uniform policy, 10^6 episodes
    ChainEnv env(3);
    TabularMDP mdp = env.to_tabular(0.95);
    std::vector<double> policy(6, 0.5);
    ExactSolution sol = exact_solve(mdp, policy);

    Rng rng(2024);
    const int episodes = 1000000;
    double acc = 0.0, acc2 = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
      int s = 0;
      double ret = 0.0, disc = 1.0;
      for (int t = 0; t < 200 && !mdp.terminal[s]; ++t) {
        const int a = static_cast<int>(rng.next_u64() % 2);
        ret += disc * mdp.r(s, a);
        disc *= mdp.gamma;
        int ns = 0;
        double u = rng.uniform(), cum = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          cum += mdp.p(s, a, s2);
          if (u < cum) { ns = s2; break; }
        }
        s = ns;
      }
      acc += ret;
      acc2 += ret * ret;
    }
    const double mc_mean = acc / episodes;
    const double mc_var = acc2 / episodes - mc_mean * mc_mean;
    const double stderr_ = std::sqrt(mc_var / episodes);
    CHECK(std::abs(sol.V[0] - mc_mean) < 3.0 * stderr_);
  }

  SUBCASE("non-stochastic policy row rejected") {
    ChainEnv env;
    TabularMDP mdp = env.to_tabular(0.99);
    std::vector<double> policy(10, 0.3);
    CHECK_THROWS_AS(exact_solve(mdp, policy), EnvError);
  }
}
