#include "choosiow/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace choosiow {

void SolverOptions::validate() const {
  if (!(gradient_tolerance > 0.0) || !std::isfinite(gradient_tolerance)) {
    throw InputError("gradient_tolerance must be positive");
  }
  if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
  if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
    throw InputError("line_search_shrink must lie in (0, 1)");
  }
  if (!(armijo_constant > 0.0 && armijo_constant < 1.0)) throw InputError("armijo_constant must lie in (0, 1)");
  if (!(max_step > 0.0)) throw InputError("max_step must be positive");
}

Vector initial_guess(const PopulationVector& population) {
  return (0.5 * population.counts().array().log()).matrix();
}

namespace {

constexpr int kMaxBacktracks = 60;
constexpr int kPolishSweeps = 50;

// e^x - 1 - x without cancellation near zero.
double exp_remainder(double x) {
  if (std::abs(x) < 0.5) {
    double term = x * x / 2.0;
    double sum = term;
    for (int n = 3; n < 40; ++n) {
      term *= x / n;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

// Change in H(b) - <nu, b> along `step`, written as the first-order term plus a
// non-negative exponential remainder so the difference keeps full precision
// once the iterate is close to the optimum.
double objective_change(const Vector& beta, const Vector& gradient, const Vector& step, const Matrix& pi) {
  const auto I = pi.rows();
  const auto J = pi.cols();
  double change = gradient.dot(step);
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    change += 0.5 * beta(k) * beta(k) * exp_remainder(2.0 * step(k));
  }
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      if (pi(i, j) == 0.0) continue;
      change += pi(i, j) * beta(i) * beta(I + j) * exp_remainder(step(i) + step(I + j));
    }
  }
  return change;
}

using WideVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// One Gauss-Seidel pass: each beta_k solves beta_k^2 + beta_k S_k = nu_k exactly
// given the others, where S_k sums Pi * beta over the opposite sex. Every update
// minimises the objective along one coordinate.
void coordinate_sweep(WideVector& beta, const WideVector& nu, const WideMatrix& pi) {
  const auto I = pi.rows();
  const auto J = pi.cols();
  auto update = [&](Eigen::Index k, long double exposure) {
    beta(k) = 2.0L * nu(k) / (exposure + std::sqrt(exposure * exposure + 4.0L * nu(k)));
  };
  for (Eigen::Index i = 0; i < I; ++i) update(i, pi.row(i).dot(beta.tail(J)));
  for (Eigen::Index j = 0; j < J; ++j) update(I + j, pi.col(j).dot(beta.head(I)));
}

// Newton leaves residuals of order eps * nu on the most populous types, and
// the coupled step spreads that noise into the sparse ones. Coordinate sweeps
// in extended precision settle every type's own equation before rounding back.
Vector polish(const Vector& b, const Vector& nu, const Matrix& pi) {
  WideVector beta = b.cast<long double>().array().exp();
  const WideVector wide_nu = nu.cast<long double>();
  const WideMatrix wide_pi = pi.cast<long double>();
  const long double eps = std::numeric_limits<long double>::epsilon();
  for (int sweep = 0; sweep < kPolishSweeps; ++sweep) {
    const WideVector before = beta;
    coordinate_sweep(beta, wide_nu, wide_pi);
    if (((beta - before).array().abs() <= 8.0L * eps * beta.array()).all()) break;
  }
  return beta.array().log().cast<double>();
}

bool within_bound(const Vector& b) {
  return b.allFinite() && b.cwiseAbs().maxCoeff() <= kLogAmplitudeBound;
}

Equilibrium finish(const ValidatedMarket& market, const Vector& b, const Vector& gradient, int iterations,
                   std::vector<double> trace) {
  auto amplitudes = AmplitudeVector::from_log(b);
  auto distribution = marriage_distribution(amplitudes, market.gains);
  const double objective = dual_value(b, market.gains) - market.population.counts().dot(b);
  return Equilibrium{std::move(amplitudes), std::move(distribution), market, gradient.norm(),
                     iterations,           objective,               std::move(trace)};
}

}  // namespace

Equilibrium solve(const ValidatedMarket& market, const SolverOptions& options) {
  return solve_from(market, initial_guess(market.population), options);
}

Equilibrium solve_from(const ValidatedMarket& market, const Vector& start, const SolverOptions& options) {
  options.validate();
  const Vector& nu = market.population.counts();
  const Matrix& pi = market.gains.entries();
  if (start.size() != nu.size()) throw InputError("starting point has the wrong length");

  const double tolerance = options.gradient_tolerance * nu.norm();

  Vector b = start;
  DualObjective eval = objective_H(b, market.gains);
  Vector gradient = eval.gradient - nu;
  double objective = eval.value - nu.dot(b);
  std::vector<double> trace{objective};

  int iterations = 0;
  while (true) {
    const double gnorm = gradient.norm();
    if (gnorm <= tolerance) break;
    if (iterations >= options.max_iterations) {
      std::ostringstream msg;
      msg << "Newton iteration did not converge in " << options.max_iterations
          << " iterations (residual norm " << gnorm << ", tolerance " << tolerance << ")";
      throw SolverError(SolverError::Kind::NotConverged, msg.str(), b, gnorm, iterations);
    }

    Eigen::LLT<Matrix> llt(eval.hessian);
    if (llt.info() != Eigen::Success) {
      throw SolverError(SolverError::Kind::FactorizationFailed, "Hessian Cholesky factorization failed", b, gnorm,
                        iterations);
    }
    Vector step = -llt.solve(gradient);
    const double longest = step.lpNorm<Eigen::Infinity>();
    if (longest > options.max_step) step *= options.max_step / longest;

    const Vector beta = b.array().exp();
    const double slope = gradient.dot(step);


    double t = 1.0;
    bool accepted = false;
    double change = 0.0;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= options.line_search_shrink) {
      const Vector trial = b + t * step;
      if (!within_bound(trial)) continue;
      change = objective_change(beta, gradient, t * step, pi);
      if (std::isfinite(change) && change <= options.armijo_constant * t * slope) {
        b = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw SolverError(SolverError::Kind::LineSearchFailed, "Armijo line search failed to find a descent step", b,
                        gnorm, iterations);
    }
    eval = objective_H(b, market.gains);
    gradient = eval.gradient - nu;
    objective += change;
    trace.push_back(objective);
    ++iterations;
  }

  const Vector polished = polish(b, nu, pi);
  const double change = objective_change(b.array().exp(), gradient, polished - b, pi);
  if (objective + change <= objective && within_bound(polished)) {
    b = polished;
    gradient = objective_H(b, market.gains).gradient - nu;
    objective += change;
    trace.push_back(objective);
  }

  return finish(market, b, gradient, iterations, std::move(trace));
}

ReducedMarket reduce_unpopulated(const GainsMatrix& gains, const Vector& raw_population) {
  const std::size_t I = gains.rows();
  const std::size_t J = gains.cols();
  if (static_cast<std::size_t>(raw_population.size()) != I + J) {
    std::ostringstream msg;
    msg << "dimension mismatch: gains is " << I << "x" << J << " but population has " << raw_population.size()
        << " entries";
    throw InputError(msg.str());
  }
  for (Eigen::Index k = 0; k < raw_population.size(); ++k) {
    if (!std::isfinite(raw_population(k)) || raw_population(k) < 0.0) {
      throw InputError("population entry " + std::to_string(k + 1) + " is negative or not finite");
    }
  }

  std::vector<std::size_t> men;
  std::vector<std::size_t> women;
  for (std::size_t i = 0; i < I; ++i) {
    if (raw_population(static_cast<Eigen::Index>(i)) > 0.0) men.push_back(i);
  }
  for (std::size_t j = 0; j < J; ++j) {
    if (raw_population(static_cast<Eigen::Index>(I + j)) > 0.0) women.push_back(j);
  }
  if (men.empty() && women.empty()) throw InputError("all types are unpopulated");
  if (men.empty()) throw InputError("every male type is unpopulated");
  if (women.empty()) throw InputError("every female type is unpopulated");

  const auto rI = static_cast<Eigen::Index>(men.size());
  const auto rJ = static_cast<Eigen::Index>(women.size());
  Matrix sub(rI, rJ);
  Vector nu(rI + rJ);
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (Eigen::Index a = 0; a < rI; ++a) {
    const std::size_t i = men[static_cast<std::size_t>(a)];
    rows.push_back(gains.row_labels()[i]);
    nu(a) = raw_population(static_cast<Eigen::Index>(i));
    for (Eigen::Index c = 0; c < rJ; ++c) sub(a, c) = gains(i, women[static_cast<std::size_t>(c)]);
  }
  for (Eigen::Index c = 0; c < rJ; ++c) {
    const std::size_t j = women[static_cast<std::size_t>(c)];
    cols.push_back(gains.col_labels()[j]);
    nu(rI + c) = raw_population(static_cast<Eigen::Index>(I + j));
  }
  return ReducedMarket{validate_market(GainsMatrix(std::move(sub), std::move(rows), std::move(cols)),
                                       PopulationVector(std::move(nu))),
                       std::move(men), std::move(women), I, J};
}

MaritalDistribution embed_distribution(const ReducedMarket& reduced, const MaritalDistribution& mu) {
  const auto I = static_cast<Eigen::Index>(reduced.original_men);
  const auto J = static_cast<Eigen::Index>(reduced.original_women);
  MaritalDistribution full{Matrix::Zero(I, J), Vector::Zero(I), Vector::Zero(J)};
  for (std::size_t a = 0; a < reduced.men.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(reduced.men[a]);
    full.single_men(i) = mu.single_men(static_cast<Eigen::Index>(a));
    for (std::size_t c = 0; c < reduced.women.size(); ++c) {
      full.married(i, static_cast<Eigen::Index>(reduced.women[c])) =
          mu.married(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
    }
  }
  for (std::size_t c = 0; c < reduced.women.size(); ++c) {
    full.single_women(static_cast<Eigen::Index>(reduced.women[c])) = mu.single_women(static_cast<Eigen::Index>(c));
  }
  return full;
}

std::vector<std::optional<double>> embed_amplitudes(const ReducedMarket& reduced, const Vector& beta) {
  std::vector<std::optional<double>> full(reduced.original_men + reduced.original_women);
  const std::size_t rI = reduced.men.size();
  for (std::size_t a = 0; a < rI; ++a) full[reduced.men[a]] = beta(static_cast<Eigen::Index>(a));
  for (std::size_t c = 0; c < reduced.women.size(); ++c) {
    full[reduced.original_men + reduced.women[c]] = beta(static_cast<Eigen::Index>(rI + c));
  }
  return full;
}

}  // namespace choosiow
