#ifndef CHOOSIOW_CHOICE_HPP
#define CHOOSIOW_CHOICE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "choosiow/market.hpp"
#include "choosiow/solver.hpp"

namespace choosiow {

/// Seeded stream of uniforms in the open interval (0, 1).
///
/// Built directly on mt19937_64 bits so a seed reproduces the same stream on
/// every standard library.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double next() {
    // 53 random bits centred in their cell: never 0, never 1.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Inverse CDF of the standard Gumbel law F(x) = exp(-exp(-x)).
inline double gumbel_quantile(double u) { return -std::log(-std::log(u)); }

inline double gumbel_sample(UniformSource& source) { return gumbel_quantile(source.next()); }

/// Systematic utilities over the alternatives 0..J (0 = stay single) plus noise scale.
class ChoiceModel {
 public:
  ChoiceModel(Vector utilities, double sigma = 1.0);

  const Vector& utilities() const { return utilities_; }
  double sigma() const { return sigma_; }
  std::size_t alternatives() const { return static_cast<std::size_t>(utilities_.size()); }

 private:
  Vector utilities_;
  double sigma_;
};

/// Logit probabilities exp(eta_j / sigma) / sum_k exp(eta_k / sigma).
Vector choice_probabilities(const ChoiceModel& model);

/// sigma -> 0 limit: uniform mass on the maximisers of eta.
Vector sigma_limit(const ChoiceModel& model);

struct SimulationResult {
  Vector frequencies;
  std::vector<std::uint64_t> counts;
  std::uint64_t sample_count = 0;
  /// Mean and variance of every Gumbel perturbation drawn.
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  std::uint64_t seed = 0;
};

/// Draws n agents; each picks the argmax of eta_j + sigma * eps_j, ties to the lowest index.
SimulationResult simulate_choices(const ChoiceModel& model, std::uint64_t n, UniformSource& source);

struct TypeConsistency {
  std::string label;
  bool male = true;
  std::vector<std::size_t> alternatives;  // partner indices (0 = single, j + 1 = partner type j)
  Vector target;                          // mu / nu for each listed alternative
  SimulationResult simulation;
  double max_deviation = 0.0;
};

struct ConsistencyReport {
  std::vector<TypeConsistency> types;
  double max_deviation = 0.0;
  std::uint64_t seed = 0;
};

/// Rebuilds utility differences log(mu_ij / mu_i0) (and the female analogue) from a
/// solved market, simulates `n_per_type` agents of every type, and compares the
/// empirical choice frequencies with mu / nu. Partners with mu_ij == 0 are excluded.
ConsistencyReport equilibrium_consistency(const Equilibrium& eq, std::uint64_t n_per_type, UniformSource& source);

}  // namespace choosiow

#endif  // CHOOSIOW_CHOICE_HPP
