#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace p3o {

class AdvantageError : public std::runtime_error {
 public:
  explicit AdvantageError(const std::string& what) : std::runtime_error(what) {}
};

// n-step advantage over a terminal-free segment:
//   A_t = gamma^{T-t} V(s_T) + sum_{k=t}^{T-1} gamma^{k-t} r_k - V(s_t)
std::vector<double> nstep_advantage(std::span<const double> rewards,
                                    std::span<const double> values,
                                    double bootstrap, double gamma);

// GAE recursion A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1},
// delta_t = r_t + gamma*(1-done_t)*V(s_{t+1}) - V(s_t). bootstrap is
// V(s_T) for the value after the last step (ignored when done_{T-1}).
std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const uint8_t> dones,
                        double bootstrap, double gamma, double lambda_gae);

// As gae() but splitting at terminals and applying the n-step formula per
// sub-segment with bootstrap 0 at terminals.
std::vector<double> nstep_advantage_segments(std::span<const double> rewards,
                                             std::span<const double> values,
                                             std::span<const uint8_t> dones,
                                             double bootstrap, double gamma);

// TD(0) target r + gamma_v * next_value; callers pass next_value 0 at a
// terminal. The target is a constant w.r.t. the value parameters.
double td0_target(double reward, double next_value, double gamma_v);

// In-place (x - mean) / (std + 1e-8).
void normalize_advantages(std::vector<double>& adv);

}  // namespace p3o
