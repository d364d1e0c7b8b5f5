#include "p3o/advantage.hpp"

#include <cmath>

namespace p3o {

namespace {
void check_lengths(size_t r, size_t v, size_t d) {
  if (r == 0) throw AdvantageError("empty segment");
  if (r != v || (d != 0 && d != r))
    throw AdvantageError("advantage array length mismatch");
}
}  // namespace

std::vector<double> nstep_advantage(std::span<const double> rewards,
                                    std::span<const double> values,
                                    double bootstrap, double gamma) {
  check_lengths(rewards.size(), values.size(), 0);
  const int T = static_cast<int>(rewards.size());
  std::vector<double> adv(T);
  for (int t = 0; t < T; ++t) {
    double acc = 0.0, disc = 1.0;
    for (int k = t; k < T; ++k) {
      acc += disc * rewards[k];
      disc *= gamma;
    }
    adv[t] = acc + disc * bootstrap - values[t];  // disc == gamma^{T-t}
  }
  return adv;
}

std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const uint8_t> dones,
                        double bootstrap, double gamma, double lambda_gae) {
  check_lengths(rewards.size(), values.size(), dones.size());
  if (gamma < 0.0 || gamma > 1.0 || lambda_gae < 0.0 || lambda_gae > 1.0)
    throw AdvantageError("gamma and lambda_gae must lie in [0,1]");
  const int T = static_cast<int>(rewards.size());
  std::vector<double> adv(T);
  double next_adv = 0.0;
  double next_value = bootstrap;
  for (int t = T - 1; t >= 0; --t) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * not_done * next_value - values[t];
    next_adv = delta + gamma * lambda_gae * not_done * next_adv;
    adv[t] = next_adv;
    next_value = values[t];
  }
  return adv;
}

std::vector<double> nstep_advantage_segments(std::span<const double> rewards,
                                             std::span<const double> values,
                                             std::span<const uint8_t> dones,
                                             double bootstrap, double gamma) {
  check_lengths(rewards.size(), values.size(), dones.size());
  const int T = static_cast<int>(rewards.size());
  std::vector<double> adv(T);
  int start = 0;
  for (int t = 0; t < T; ++t) {
    const bool cut = dones[t] || t == T - 1;
    if (!cut) continue;
    const double boot = dones[t] ? 0.0 : bootstrap;
    auto seg = nstep_advantage(rewards.subspan(start, t - start + 1),
                               values.subspan(start, t - start + 1), boot, gamma);
    std::copy(seg.begin(), seg.end(), adv.begin() + start);
    start = t + 1;
  }
  return adv;
}

double td0_target(double reward, double next_value, double gamma_v) {
  const double target = reward + gamma_v * next_value;
  if (!std::isfinite(target)) throw AdvantageError("non-finite TD(0) target");
  return target;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) throw AdvantageError("empty advantage batch");
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double denom = std::sqrt(var) + 1e-8;
  for (double& a : adv) a = (a - mean) / denom;
}

}  // namespace p3o
