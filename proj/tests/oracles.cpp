#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace oracle {

using Wide = long double;

ValidatedMarket make_market(const Matrix& pi, const Vector& nu) {
  return choosiow::validate_market(choosiow::GainsMatrix(pi), choosiow::PopulationVector(nu));
}

ValidatedMarket random_market(std::mt19937_64& rng, const MarketShape& shape) {
  std::uniform_int_distribution<int> men(1, shape.max_men);
  std::uniform_int_distribution<int> women(1, shape.max_women);
  std::uniform_real_distribution<double> gain(shape.pi_low, shape.pi_high);
  std::uniform_real_distribution<double> log_nu(std::log(shape.nu_low), std::log(shape.nu_high));
  const int I = men(rng);
  const int J = women(rng);
  Matrix pi(I, J);
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) pi(i, j) = gain(rng);
  }
  Vector nu(I + J);
  for (int k = 0; k < I + J; ++k) nu(k) = std::exp(log_nu(rng));
  return make_market(pi, nu);
}

namespace {

// Singles x on the side with population n when the other side has m:
// (n - x)^2 = Pi^2 x (x + m - n), i.e. (1 - Pi^2) x^2 - (2n + Pi^2 (m - n)) x + n^2 = 0.
// Solving for the singles directly avoids the cancellation in n - mu.
Wide singles(Wide pi, Wide n, Wide m) {
  const Wide p2 = pi * pi;
  const Wide a = 1.0L - p2;
  const Wide b = 2.0L * n + p2 * (m - n);
  const Wide c = n * n;
  if (a == 0.0L) return c / b;
  const Wide root = std::sqrt(b * b - 4.0L * a * c);
  const Wide q = 0.5L * (b + (b >= 0.0L ? root : -root));
  const Wide lo = std::max(0.0L, n - m);
  for (const Wide x : {c / q, q / a}) {
    if (x >= lo * (1.0L - 1e-15L) && x <= n * (1.0L + 1e-15L)) return x;
  }
  return c / q;
}

}  // namespace

OneByOne one_by_one(double pi, double men, double women) {
  if (pi == 0.0) return {men, women, 0.0};
  const Wide x = singles(pi, men, women);
  const Wide y = singles(pi, women, men);
  return {static_cast<double>(x), static_cast<double>(y), static_cast<double>(pi * std::sqrt(x * y))};
}

Vector fixed_point_amplitudes(const ValidatedMarket& market, int max_sweeps) {
  const auto I = static_cast<Eigen::Index>(market.num_men_types());
  const auto J = static_cast<Eigen::Index>(market.num_women_types());
  const Matrix& pi = market.gains.entries();
  const Vector& nu = market.population.counts();
  std::vector<Wide> beta(static_cast<std::size_t>(I + J));
  for (Eigen::Index k = 0; k < I + J; ++k) beta[static_cast<std::size_t>(k)] = std::sqrt(static_cast<Wide>(nu(k)));

  // Each type's own equation beta^2 + beta S = nu, solved for beta with S fixed.
  auto root = [](Wide s, Wide v) { return 2.0L * v / (s + std::sqrt(s * s + 4.0L * v)); };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Wide change = 0.0L;
    for (Eigen::Index i = 0; i < I; ++i) {
      Wide s = 0.0L;
      for (Eigen::Index j = 0; j < J; ++j) s += pi(i, j) * beta[static_cast<std::size_t>(I + j)];
      const Wide next = root(s, nu(i));
      change = std::max(change, std::abs(next - beta[static_cast<std::size_t>(i)]) / next);
      beta[static_cast<std::size_t>(i)] = next;
    }
    for (Eigen::Index j = 0; j < J; ++j) {
      Wide s = 0.0L;
      for (Eigen::Index i = 0; i < I; ++i) s += pi(i, j) * beta[static_cast<std::size_t>(i)];
      const Wide next = root(s, nu(I + j));
      change = std::max(change, std::abs(next - beta[static_cast<std::size_t>(I + j)]) / next);
      beta[static_cast<std::size_t>(I + j)] = next;
    }
    if (change <= 4.0L * std::numeric_limits<Wide>::epsilon()) break;
  }
  Vector out(I + J);
  for (Eigen::Index k = 0; k < I + J; ++k) out(k) = static_cast<double>(beta[static_cast<std::size_t>(k)]);
  return out;
}

double spectral_radius(const choosiow::Equilibrium& eq) {
  const auto I = static_cast<Eigen::Index>(eq.market.num_men_types());
  const auto J = static_cast<Eigen::Index>(eq.market.num_women_types());
  const Vector& beta = eq.amplitudes.beta();
  const Vector& nu = eq.market.population.counts();
  const Matrix& pi = eq.market.gains.entries();
  const Vector d = (1.0 + nu.array() / beta.array().square()).matrix();
  const Matrix a = d.head(I).cwiseInverse().asDiagonal() * pi * d.tail(J).cwiseInverse().asDiagonal() * pi.transpose();
  Eigen::EigenSolver<Matrix> solver(a, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector up = x;
    Vector down = x;
    up(k) += h;
    down(k) -= h;
    g(k) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
  }
  return d;
}

double DerivativeGaps::worst() const {
  return std::max({r_matrix, d_beta_d_gains, elasticity, transfer, participation});
}

namespace {

// A difference quotient of values of size |base| with step h is only good to
// about eps |base| / h; smaller derivatives are compared against that floor.
double gap(double analytic, double numeric, double base, double h) {
  const double floor = 1e3 * 64.0 * std::numeric_limits<double>::epsilon() * std::abs(base) / (2.0 * h);
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), floor, std::numeric_limits<double>::min()});
}

Vector resolve(const ValidatedMarket& market) { return choosiow::solve(market).amplitudes.beta(); }

}  // namespace

DerivativeGaps derivative_gaps(const ValidatedMarket& market, double step, bool with_gains) {
  using choosiow::GainsMatrix;
  using choosiow::PopulationVector;
  const auto I = static_cast<Eigen::Index>(market.num_men_types());
  const auto J = static_cast<Eigen::Index>(market.num_women_types());
  const Eigen::Index n = I + J;
  const Matrix& pi = market.gains.entries();
  const Vector& nu = market.population.counts();

  const choosiow::Equilibrium eq = choosiow::solve(market);
  const choosiow::StaticsReport report = choosiow::statics_matrix(eq);
  const auto sens = choosiow::gains_sensitivity(eq, report);
  const auto elasticity = choosiow::marriage_elasticity(eq, report);
  const auto transfers = choosiow::transfer_analysis(eq, report);
  const auto participation = choosiow::participation_analysis(eq, report);
  const Vector& beta = eq.amplitudes.beta();

  DerivativeGaps out;
  out.min_fd_own_transfer = std::numeric_limits<double>::infinity();
  out.min_fd_own_participation = std::numeric_limits<double>::infinity();
  const auto u = [](Eigen::Index k) { return static_cast<std::size_t>(k); };

  for (Eigen::Index l = 0; l < n; ++l) {
    const double h = step * nu(l);
    Vector up = nu;
    Vector down = nu;
    up(l) += h;
    down(l) -= h;
    const Vector bp = resolve(choosiow::validate_market(market.gains, PopulationVector(up)));
    const Vector bm = resolve(choosiow::validate_market(market.gains, PopulationVector(down)));

    for (Eigen::Index k = 0; k < n; ++k) {
      const double fd = (bp(k) * bp(k) - bm(k) * bm(k)) / (2.0 * h) / (beta(k) * beta(k));
      out.r_matrix = std::max(out.r_matrix, gap(report.r_matrix(k, l), fd, 1.0, h));
    }
    for (Eigen::Index i = 0; i < I; ++i) {
      for (Eigen::Index j = 0; j < J; ++j) {
        const double lp = std::log(pi(i, j) * bp(i) * bp(I + j));
        const double lm = std::log(pi(i, j) * bm(i) * bm(I + j));
        const auto& e = elasticity(u(i), u(j), u(l));
        if (e) out.elasticity = std::max(out.elasticity, gap(*e, (lp - lm) / (2.0 * h), 1.0, h));

        const double tp = std::log(bp(i) / bp(I + j));  // half the transfer index
        const double tm = std::log(bm(i) / bm(I + j));
        const double fd_tau = (tp - tm) / (2.0 * h);
        out.transfer = std::max(out.transfer, gap(transfers.transfer_derivatives(u(i), u(j), u(l)), fd_tau, 1.0, h));
        if (l == i) out.min_fd_own_transfer = std::min(out.min_fd_own_transfer, fd_tau);
      }
    }
    const double sp = bp(l) * bp(l) / up(l);
    const double sm = bm(l) * bm(l) / down(l);
    const double fd_s = (sp - sm) / (2.0 * h);
    out.participation =
        std::max(out.participation, gap(participation[u(l)].derivative, fd_s, participation[u(l)].nonparticipation, h));
    out.min_fd_own_participation = std::min(out.min_fd_own_participation, fd_s);
  }

  if (!with_gains) return out;
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const double h = step * (1.0 + pi(i, j));
      const bool central = pi(i, j) >= h;
      Matrix a = pi;
      Matrix b = pi;
      a(i, j) += h;
      b(i, j) += central ? -h : 2.0 * h;
      const Vector ba = resolve(choosiow::validate_market(GainsMatrix(a), market.population));
      const Vector bb = resolve(choosiow::validate_market(GainsMatrix(b), market.population));
      for (Eigen::Index k = 0; k < n; ++k) {
        const double fd = central ? (ba(k) - bb(k)) / (2.0 * h) : (4.0 * ba(k) - bb(k) - 3.0 * beta(k)) / (2.0 * h);
        const double base = central ? beta(k) : 4.0 * beta(k);
        out.d_beta_d_gains = std::max(out.d_beta_d_gains, gap(sens.d_beta(u(i), u(j), u(k)), fd, base, h));
      }
    }
  }
  return out;
}

}  // namespace oracle
