#include "p3o/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace p3o {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double logsumexp(std::span<const double> xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}
}  // namespace

PolicyDist PolicyDist::categorical(std::vector<double> logits) {
  if (logits.empty()) throw DistError("categorical needs at least one logit");
  PolicyDist d;
  d.kind = Kind::categorical;
  d.logits = std::move(logits);
  return d;
}

PolicyDist PolicyDist::gaussian(std::vector<double> mean, std::vector<double> log_std) {
  if (mean.empty() || mean.size() != log_std.size())
    throw DistError("gaussian mean/log_std dimension mismatch");
  for (double ls : log_std)
    if (!std::isfinite(ls)) throw DistError("non-finite log_std");
  PolicyDist d;
  d.kind = Kind::gaussian;
  d.mean = std::move(mean);
  d.log_std = std::move(log_std);
  return d;
}

int PolicyDist::dim() const {
  return static_cast<int>(kind == Kind::categorical ? logits.size() : mean.size());
}

double PolicyDist::log_prob(int action) const {
  if (kind != Kind::categorical) throw DistError("integer action on gaussian dist");
  if (action < 0 || action >= dim())
    throw DistError("action index " + std::to_string(action) + " out of range");
  return logits[action] - logsumexp(logits);
}

double PolicyDist::log_prob(std::span<const double> action) const {
  if (kind == Kind::categorical) {
    if (action.size() != 1) throw DistError("categorical action must be a single index");
    return log_prob(static_cast<int>(action[0]));
  }
  if (static_cast<int>(action.size()) != dim())
    throw DistError("gaussian action dimension mismatch");
  double lp = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

std::vector<double> PolicyDist::probs() const {
  if (kind != Kind::categorical) throw DistError("probs() on gaussian dist");
  const double lse = logsumexp(logits);
  std::vector<double> p(logits.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return p;
}

std::vector<double> PolicyDist::sample(Rng& rng) const {
  if (kind == Kind::categorical) {
    const auto p = probs();
    return {static_cast<double>(rng.categorical(p))};
  }
  std::vector<double> a(mean.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
  return a;
}

std::vector<double> PolicyDist::mode() const {
  if (kind == Kind::gaussian) return mean;
  const auto it = std::max_element(logits.begin(), logits.end());
  return {static_cast<double>(it - logits.begin())};
}

double PolicyDist::entropy() const {
  if (kind == Kind::categorical) {
    const double lse = logsumexp(logits);
    double h = 0.0;
    for (double l : logits) {
      const double lp = l - lse;
      h -= std::exp(lp) * lp;
    }
    return h;
  }
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 * (kLog2Pi + 1.0);
  return h;
}

double kl(const PolicyDist& old_dist, const PolicyDist& new_dist) {
  if (old_dist.kind != new_dist.kind || old_dist.dim() != new_dist.dim())
    throw DistError("kl: distribution kind or dimension mismatch");
  if (old_dist.kind == PolicyDist::Kind::categorical) {
    const double lse_old = logsumexp(old_dist.logits);
    const double lse_new = logsumexp(new_dist.logits);
    double d = 0.0;
    for (int i = 0; i < old_dist.dim(); ++i) {
      const double lpo = old_dist.logits[i] - lse_old;
      const double lpn = new_dist.logits[i] - lse_new;
      d += std::exp(lpo) * (lpo - lpn);
    }
    return d;
  }
  double d = 0.0;
  for (int i = 0; i < old_dist.dim(); ++i) {
    const double lso = old_dist.log_std[i], lsn = new_dist.log_std[i];
    const double var_o = std::exp(2.0 * lso);
    const double var_n = std::exp(2.0 * lsn);
    const double dm = old_dist.mean[i] - new_dist.mean[i];
    d += lsn - lso + (var_o + dm * dm) / (2.0 * var_n) - 0.5;
  }
  return d;
}

}  // namespace p3o
