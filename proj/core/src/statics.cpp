#include "choosiow/statics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace choosiow {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t k) { return static_cast<Index>(k); }

bool type_has_gains(const GainsMatrix& gains, std::size_t k) {
  return k < gains.rows() ? !gains.row_vanishes(k) : !gains.col_vanishes(k - gains.rows());
}

}  // namespace

StaticsReport statics_matrix(const Equilibrium& eq) {
  const Vector& b = eq.amplitudes.log_beta();
  const Vector& beta = eq.amplitudes.beta();
  const DualObjective dual = objective_H(b, eq.market.gains);

  // R = 2 Delta^{-1} M^{-1} Delta^{-1} where D^2 H = Delta M Delta; M is far
  // better scaled than D^2 H itself when the populations span many decades.
  Eigen::LLT<Matrix> llt(dual.scaled_hessian);
  if (llt.info() != Eigen::Success) throw StaticsError("Hessian at the equilibrium is not positive definite");
  const Matrix inverse = llt.solve(Matrix::Identity(b.size(), b.size()));
  const Vector inv_beta = beta.cwiseInverse();

  StaticsReport report;
  report.r_matrix = 2.0 * inv_beta.asDiagonal() * inverse * inv_beta.asDiagonal();
  report.d_beta = 0.5 * beta.asDiagonal() * report.r_matrix;

  const SpectralDiagnostic spectral = spectral_diagnostic(eq);
  report.spectral_radius = spectral.lambda_max;
  report.spectral_pass = spectral.pass;
  report.sign_check = verify_sign_pattern(report, eq);
  report.conjecture_probe =
      conjecture_probe(report, eq.market.num_men_types(), eq.market.num_women_types());
  return report;
}

SignCheck verify_sign_pattern(const Matrix& r, std::size_t men, std::size_t women, const Vector& singles,
                              const Vector& population, SignMode mode) {
  const std::size_t n = men + women;
  if (static_cast<std::size_t>(r.rows()) != n || static_cast<std::size_t>(r.cols()) != n ||
      static_cast<std::size_t>(singles.size()) != n || static_cast<std::size_t>(population.size()) != n) {
    throw InputError("sign check: inconsistent dimensions");
  }
  constexpr double kSlack = 1e-9;
  const bool strict = mode == SignMode::Strict;

  SignCheck check;
  check.mode = mode;
  auto record = [&](bool ok, const char* rule, std::size_t k, std::size_t l, double value, double bound) {
    ++check.comparisons;
    if (!ok) check.failures.push_back(SignViolation{rule, k, l, value, bound});
  };

  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double rkl = r(idx(k), idx(l));
      const double scale = std::sqrt(std::abs(r(idx(k), idx(k)) * r(idx(l), idx(l))));
      const bool same_side = (k < men) == (l < men);
      if (!same_side) {
        record(strict ? rkl < 0.0 : rkl <= kSlack * scale, "cross-sex-negative", k, l, rkl, 0.0);
      } else {
        const double weight = 0.5 * (singles(idx(k)) + population(idx(k)));
        const double lhs = weight * rkl;
        const double delta = k == l ? 1.0 : 0.0;
        const double slack = kSlack * std::max(1.0, weight * scale);
        record(strict ? lhs > delta : lhs >= delta - slack, "same-sex-lower-bound", k, l, lhs, delta);
      }
      if (k != l) {
        const double product = r(idx(k), idx(k)) * r(idx(l), idx(l));
        record(strict ? rkl * rkl < product : rkl * rkl <= product * (1.0 + kSlack), "cauchy-schwarz", k, l,
               rkl * rkl, product);
      }
    }
  }
  check.passed = check.failures.empty();
  return check;
}

SignCheck verify_sign_pattern(const StaticsReport& report, const Equilibrium& eq) {
  const Vector singles = eq.amplitudes.beta().array().square();
  return verify_sign_pattern(report.r_matrix, eq.market.num_men_types(), eq.market.num_women_types(), singles,
                             eq.market.population.counts(),
                             eq.market.nondegenerate() ? SignMode::Strict : SignMode::Boundary);
}

GainsSensitivity gains_sensitivity(const Equilibrium& eq, const StaticsReport& report) {
  const std::size_t I = eq.market.num_men_types();
  const std::size_t J = eq.market.num_women_types();
  const std::size_t n = I + J;
  const Vector& beta = eq.amplitudes.beta();
  const Matrix& r = report.r_matrix;
  const Matrix& d_beta = report.d_beta;

  GainsSensitivity out{Array3<double>(I, J, n), Array3<std::optional<double>>(I, J, n)};
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t w = I + j;
      const double weight = beta(idx(i)) * beta(idx(w));
      const double gain = eq.market.gains(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        out.d_beta(i, j, k) = -weight * (d_beta(idx(k), idx(i)) + d_beta(idx(k), idx(w)));
        if (gain > 0.0) {
          const double mu = eq.distribution.married(idx(i), idx(j));
          out.d_log_beta(i, j, k) = -(mu / (2.0 * gain)) * (r(idx(k), idx(i)) + r(idx(k), idx(w)));
        }
      }
    }
  }
  return out;
}

Array3<std::optional<double>> marriage_elasticity(const Equilibrium& eq, const StaticsReport& report) {
  const std::size_t I = eq.market.num_men_types();
  const std::size_t J = eq.market.num_women_types();
  const Matrix& r = report.r_matrix;
  Array3<std::optional<double>> out(I, J, I + J);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      if (!(eq.distribution.married(idx(i), idx(j)) > 0.0)) continue;
      for (std::size_t k = 0; k < I + J; ++k) {
        out(i, j, k) = 0.5 * (r(idx(i), idx(k)) + r(idx(k), idx(I + j)));
      }
    }
  }
  return out;
}

TransferReport transfer_analysis(const Equilibrium& eq, const StaticsReport& report,
                                 const std::optional<Matrix>& c) {
  const std::size_t I = eq.market.num_men_types();
  const std::size_t J = eq.market.num_women_types();
  const Vector& b = eq.amplitudes.log_beta();
  const Matrix& r = report.r_matrix;

  TransferReport out{Matrix(idx(I), idx(J)), Array3<double>(I, J, I + J), std::nullopt};
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      out.transfer_index(idx(i), idx(j)) = 2.0 * (b(idx(i)) - b(idx(I + j)));
      for (std::size_t k = 0; k < I + J; ++k) {
        out.transfer_derivatives(i, j, k) = 0.5 * (r(idx(i), idx(k)) - r(idx(I + j), idx(k)));
      }
    }
  }
  if (c) {
    if (c->rows() != idx(I) || c->cols() != idx(J)) throw InputError("c matrix must match the gains dimensions");
    if (!c->allFinite()) throw InputError("c matrix entries must be finite");
    out.tau = 0.5 * (out.transfer_index - *c);
  }
  return out;
}

std::vector<ParticipationRecord> participation_analysis(const Equilibrium& eq, const StaticsReport& report) {
  const std::size_t n = eq.market.num_types();
  const Vector& beta = eq.amplitudes.beta();
  const Vector& nu = eq.market.population.counts();
  std::vector<ParticipationRecord> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double singles = beta(idx(k)) * beta(idx(k));
    const double count = nu(idx(k));
    out[k].nonparticipation = singles / count;
    out[k].derivative = singles / (count * count) * (count * report.r_matrix(idx(k), idx(k)) - 1.0);
    out[k].boundary = !type_has_gains(eq.market.gains, k);
  }
  return out;
}

SpectralDiagnostic spectral_diagnostic(const Equilibrium& eq, const PowerIterationOptions& options) {
  const auto I = idx(eq.market.num_men_types());
  const auto J = idx(eq.market.num_women_types());
  const Vector& beta = eq.amplitudes.beta();
  const Vector& nu = eq.market.population.counts();
  const Vector singles = beta.array().square();
  const Vector d_men = 1.0 + nu.head(I).array() / singles.head(I).array();
  const Vector d_women = 1.0 + nu.tail(J).array() / singles.tail(J).array();

  // A = D_I^{-1} Pi D_J^{-1} Pi^T is similar to the symmetric PSD matrix
  // S = M M^T with M = D_I^{-1/2} Pi D_J^{-1/2}, so they share the Perron root.
  const Matrix m = d_men.cwiseSqrt().cwiseInverse().asDiagonal() * eq.market.gains.entries() *
                   d_women.cwiseSqrt().cwiseInverse().asDiagonal();

  SpectralDiagnostic out;
  Vector v = Vector::Ones(I) / std::sqrt(static_cast<double>(I));
  double rayleigh = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector w = m * (m.transpose() * v);
    const double next = v.dot(w);
    const double wnorm = w.norm();
    out.iterations = it;
    if (wnorm == 0.0) {
      rayleigh = 0.0;
      out.lambda_max = 0.0;
      out.pass = true;
      return out;
    }
    v = w / wnorm;
    if (it > 1 && std::abs(next - rayleigh) <= options.tolerance * std::abs(next)) {
      out.lambda_max = next;
      out.pass = next < 1.0;
      return out;
    }
    rayleigh = next;
  }
  std::ostringstream msg;
  msg << "power iteration did not converge in " << options.max_iterations << " iterations (last estimate "
      << rayleigh << ")";
  throw StaticsError(msg.str());
}

std::vector<ConjectureObservation> conjecture_probe(const StaticsReport& report, std::size_t men,
                                                    std::size_t women) {
  const Matrix& r = report.r_matrix;
  std::vector<ConjectureObservation> out;
  out.reserve(men * women);
  for (std::size_t i = 0; i < men; ++i) {
    for (std::size_t j = 0; j < women; ++j) {
      const std::size_t w = men + j;
      ConjectureObservation obs;
      obs.i = i;
      obs.j = j;
      obs.male_sum = r(idx(i), idx(i)) + r(idx(i), idx(w));
      obs.female_sum = r(idx(w), idx(w)) + r(idx(w), idx(i));
      obs.male_positive = obs.male_sum > 0.0;
      obs.female_positive = obs.female_sum > 0.0;
      out.push_back(obs);
    }
  }
  return out;
}

double FiniteDifferenceReport::worst() const {
  return std::max({r_matrix, d_beta, gains_sensitivity, marriage_elasticity, transfer_derivatives, participation});
}

namespace {

// Relative error of a difference quotient. A quotient with step h cannot resolve
// derivatives below roughly eps * |base| / h; entries under a thousand times that
// resolution are measured against it instead of against their own magnitude.
double relative_gap(double analytic, double numeric, double base, double h) {
  constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();
  constexpr double kResolutionMultiple = 1e3;
  const double resolution = kRoundoff * std::abs(base) / (2.0 * h);
  const double denom =
      std::max({std::abs(analytic), kResolutionMultiple * resolution, std::numeric_limits<double>::min()});
  return std::abs(analytic - numeric) / denom;
}

// Solves every market in `jobs` and returns the amplitudes, spreading the work over threads.
std::vector<Vector> solve_all(const std::vector<ValidatedMarket>& jobs, const SolverOptions& options) {
  std::vector<Vector> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        out[k] = solve(jobs[k], options).amplitudes.beta();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ValidatedMarket with_population(const ValidatedMarket& market, std::size_t k, double delta) {
  Vector nu = market.population.counts();
  nu(idx(k)) += delta;
  return validate_market(market.gains, PopulationVector(std::move(nu)));
}

ValidatedMarket with_gain(const ValidatedMarket& market, std::size_t i, std::size_t j, double delta) {
  Matrix pi = market.gains.entries();
  pi(idx(i), idx(j)) += delta;
  return validate_market(GainsMatrix(std::move(pi), market.gains.row_labels(), market.gains.col_labels()),
                         market.population);
}

}  // namespace

FiniteDifferenceReport finite_difference_check(const ValidatedMarket& market, double step,
                                               const SolverOptions& options) {
  if (!(step > 0.0)) throw InputError("finite-difference step must be positive");
  const std::size_t I = market.num_men_types();
  const std::size_t J = market.num_women_types();
  const std::size_t n = I + J;
  const Vector& nu = market.population.counts();

  const Equilibrium eq = solve(market, options);
  const StaticsReport report = statics_matrix(eq);
  const GainsSensitivity gains = gains_sensitivity(eq, report);
  const auto elasticity = marriage_elasticity(eq, report);
  const TransferReport transfers = transfer_analysis(eq, report);
  const auto participation = participation_analysis(eq, report);
  const Vector& beta = eq.amplitudes.beta();
  const Matrix& r = report.r_matrix;

  // Jobs: nu_l + h, nu_l - h for every l, then three gains stencils per (i, j).
  std::vector<ValidatedMarket> jobs;
  std::vector<double> nu_steps(n);
  for (std::size_t l = 0; l < n; ++l) {
    nu_steps[l] = step * nu(idx(l));
    jobs.push_back(with_population(market, l, nu_steps[l]));
    jobs.push_back(with_population(market, l, -nu_steps[l]));
  }
  struct GainStencil {
    double h;
    bool central;
  };
  std::vector<GainStencil> stencils;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const double gain = market.gains(i, j);
      const double h = step * (1.0 + gain);
      const bool central = gain - h >= 0.0;
      stencils.push_back({h, central});
      if (central) {
        jobs.push_back(with_gain(market, i, j, h));
        jobs.push_back(with_gain(market, i, j, -h));
      } else {
        jobs.push_back(with_gain(market, i, j, h));
        jobs.push_back(with_gain(market, i, j, 2.0 * h));
      }
    }
  }
  const std::vector<Vector> solved = solve_all(jobs, options);

  FiniteDifferenceReport out;
  out.resolves = jobs.size();
  auto log_mu = [&](const Vector& bv, std::size_t i, std::size_t j, const Matrix& pi) {
    return std::log(pi(idx(i), idx(j))) + std::log(bv(idx(i))) + std::log(bv(idx(I + j)));
  };
  const Matrix& pi = market.gains.entries();

  for (std::size_t l = 0; l < n; ++l) {
    const Vector& plus = solved[2 * l];
    const Vector& minus = solved[2 * l + 1];
    const double h = nu_steps[l];
    for (std::size_t k = 0; k < n; ++k) {
      const double bk = beta(idx(k));
      const double fd_r = (plus(idx(k)) * plus(idx(k)) - minus(idx(k)) * minus(idx(k))) / (2.0 * h * bk * bk);
      out.r_matrix = std::max(out.r_matrix, relative_gap(r(idx(k), idx(l)), fd_r, 1.0, h));
      const double fd_db = (plus(idx(k)) - minus(idx(k))) / (2.0 * h);
      out.d_beta = std::max(out.d_beta, relative_gap(report.d_beta(idx(k), idx(l)), fd_db, bk, h));
    }
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        const std::size_t w = I + j;
        if (elasticity(i, j, l)) {
          const double fd = (log_mu(plus, i, j, pi) - log_mu(minus, i, j, pi)) / (2.0 * h);
          out.marriage_elasticity = std::max(out.marriage_elasticity, relative_gap(*elasticity(i, j, l), fd, 1.0, h));
        }
        const double index_plus = 2.0 * (std::log(plus(idx(i))) - std::log(plus(idx(w))));
        const double index_minus = 2.0 * (std::log(minus(idx(i))) - std::log(minus(idx(w))));
        const double fd_tau = (index_plus - index_minus) / (4.0 * h);
        out.transfer_derivatives =
            std::max(out.transfer_derivatives, relative_gap(transfers.transfer_derivatives(i, j, l), fd_tau, 0.5, h));
      }
    }
    const double s_plus = plus(idx(l)) * plus(idx(l)) / (nu(idx(l)) + h);
    const double s_minus = minus(idx(l)) * minus(idx(l)) / (nu(idx(l)) - h);
    const double fd_s = (s_plus - s_minus) / (2.0 * h);
    out.participation = std::max(out.participation,
                                 relative_gap(participation[l].derivative, fd_s, participation[l].nonparticipation, h));
  }

  std::size_t cursor = 2 * n;
  std::size_t s = 0;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j, ++s, cursor += 2) {
      const GainStencil& stencil = stencils[s];
      const Vector& first = solved[cursor];
      const Vector& second = solved[cursor + 1];
      for (std::size_t k = 0; k < n; ++k) {
        double fd = 0.0;
        if (stencil.central) {
          fd = (first(idx(k)) - second(idx(k))) / (2.0 * stencil.h);
        } else {
          fd = (-3.0 * beta(idx(k)) + 4.0 * first(idx(k)) - second(idx(k))) / (2.0 * stencil.h);
        }
        // The one-sided stencil weights sum to 8 / 2h instead of 2 / 2h.
        const double base = stencil.central ? beta(idx(k)) : 4.0 * beta(idx(k));
        out.gains_sensitivity =
            std::max(out.gains_sensitivity, relative_gap(gains.d_beta(i, j, k), fd, base, stencil.h));
      }
    }
  }
  return out;
}

}  // namespace choosiow
