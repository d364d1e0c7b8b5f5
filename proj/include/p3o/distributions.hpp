#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "p3o/rng.hpp"

namespace p3o {

class DistError : public std::runtime_error {
 public:
  explicit DistError(const std::string& what) : std::runtime_error(what) {}
};

// Immutable snapshot of an action distribution: categorical over logits, or
// diagonal Gaussian with mean and log-std vectors. Actions travel as
// vectors; a categorical action is a single index in element 0.
struct PolicyDist {
  enum class Kind { categorical, gaussian };

  Kind kind;
  std::vector<double> logits;   // categorical
  std::vector<double> mean;     // gaussian
  std::vector<double> log_std;  // gaussian

  static PolicyDist categorical(std::vector<double> logits);
  static PolicyDist gaussian(std::vector<double> mean, std::vector<double> log_std);

  int dim() const;
  double log_prob(std::span<const double> action) const;
  double log_prob(int action) const;
  std::vector<double> sample(Rng& rng) const;
  std::vector<double> mode() const;  // argmax index / mean
  double entropy() const;
  std::vector<double> probs() const;  // categorical softmax
};

// Forward KL(old || new), closed form, per-dimension summed for gaussians.
double kl(const PolicyDist& old_dist, const PolicyDist& new_dist);

}  // namespace p3o
