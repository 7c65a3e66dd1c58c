#include "choosiow/choice.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace choosiow {

ChoiceModel::ChoiceModel(Vector utilities, double sigma) : utilities_(std::move(utilities)), sigma_(sigma) {
  if (utilities_.size() < 1) throw InputError("choice model needs at least one alternative");
  if (!utilities_.allFinite()) throw InputError("systematic utilities must be finite");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw InputError("noise scale sigma must be positive");
}

Vector choice_probabilities(const ChoiceModel& model) {
  const Vector scaled = model.utilities() / model.sigma();
  const Vector weights = (scaled.array() - scaled.maxCoeff()).exp();
  return weights / weights.sum();
}

Vector sigma_limit(const ChoiceModel& model) {
  const Vector& eta = model.utilities();
  const double top = eta.maxCoeff();
  Vector out = (eta.array() == top).cast<double>();
  return out / out.sum();
}

SimulationResult simulate_choices(const ChoiceModel& model, std::uint64_t n, UniformSource& source) {
  if (n == 0) throw InputError("simulation needs at least one agent");
  const Vector& eta = model.utilities();
  const Eigen::Index m = eta.size();

  SimulationResult out;
  out.counts.assign(static_cast<std::size_t>(m), 0);
  out.sample_count = n;
  out.seed = source.seed();

  // Welford running moments of the noise draws.
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t draws = 0;
  for (std::uint64_t g = 0; g < n; ++g) {
    Eigen::Index best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < m; ++a) {
      const double eps = gumbel_sample(source);
      ++draws;
      const double d = eps - mean;
      mean += d / static_cast<double>(draws);
      m2 += d * (eps - mean);
      const double value = eta(a) + model.sigma() * eps;
      if (value > best_value) {
        best_value = value;
        best = a;
      }
    }
    ++out.counts[static_cast<std::size_t>(best)];
  }
  out.frequencies.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    out.frequencies(a) = static_cast<double>(out.counts[static_cast<std::size_t>(a)]) / static_cast<double>(n);
  }
  out.sample_mean = mean;
  out.sample_variance = draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
  return out;
}

ConsistencyReport equilibrium_consistency(const Equilibrium& eq, std::uint64_t n_per_type, UniformSource& source) {
  const auto I = static_cast<Eigen::Index>(eq.market.num_men_types());
  const auto J = static_cast<Eigen::Index>(eq.market.num_women_types());
  const MaritalDistribution& mu = eq.distribution;
  const Vector& nu = eq.market.population.counts();

  ConsistencyReport report;
  report.seed = source.seed();

  auto run = [&](std::string label, bool male, double singles, const Vector& partners, double count) {
    TypeConsistency type;
    type.label = std::move(label);
    type.male = male;
    std::vector<double> eta{0.0};
    std::vector<double> target{singles / count};
    type.alternatives.push_back(0);
    for (Eigen::Index p = 0; p < partners.size(); ++p) {
      if (!(partners(p) > 0.0)) continue;
      type.alternatives.push_back(static_cast<std::size_t>(p) + 1);
      eta.push_back(std::log(partners(p) / singles));
      target.push_back(partners(p) / count);
    }
    ChoiceModel model(Eigen::Map<Vector>(eta.data(), static_cast<Eigen::Index>(eta.size())), 1.0);
    type.target = Eigen::Map<Vector>(target.data(), static_cast<Eigen::Index>(target.size()));
    type.simulation = simulate_choices(model, n_per_type, source);
    type.max_deviation = (type.simulation.frequencies - type.target).cwiseAbs().maxCoeff();
    report.max_deviation = std::max(report.max_deviation, type.max_deviation);
    report.types.push_back(std::move(type));
  };

  for (Eigen::Index i = 0; i < I; ++i) {
    run(eq.market.gains.row_labels()[static_cast<std::size_t>(i)], true, mu.single_men(i),
        mu.married.row(i).transpose(), nu(i));
  }
  for (Eigen::Index j = 0; j < J; ++j) {
    run(eq.market.gains.col_labels()[static_cast<std::size_t>(j)], false, mu.single_women(j), mu.married.col(j),
        nu(I + j));
  }
  return report;
}

}  // namespace choosiow
