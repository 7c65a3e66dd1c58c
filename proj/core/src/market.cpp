#include "choosiow/market.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace choosiow {

namespace {

std::vector<std::string> default_labels(char prefix, std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < n; ++k) labels.push_back(prefix + std::to_string(k + 1));
  return labels;
}

void check_labels(const std::vector<std::string>& labels, std::size_t expected, const char* what) {
  if (labels.size() != expected) {
    std::ostringstream msg;
    msg << what << ": expected " << expected << " labels, got " << labels.size();
    throw InputError(msg.str());
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    if (label.empty()) throw InputError(std::string(what) + ": empty label");
    if (!seen.insert(label).second) throw InputError(std::string(what) + ": duplicate label '" + label + "'");
  }
}

}  // namespace

GainsMatrix::GainsMatrix(Matrix entries, std::vector<std::string> row_labels,
                         std::vector<std::string> col_labels)
    : entries_(std::move(entries)), row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw InputError("gains matrix must be at least 1x1");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double v = entries_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "gains entry (" << i + 1 << ", " << j + 1 << ") = " << v << " is not a finite non-negative number";
        throw InputError(msg.str());
      }
    }
  }
  if (row_labels_.empty()) row_labels_ = default_labels('m', rows());
  if (col_labels_.empty()) col_labels_ = default_labels('f', cols());
  check_labels(row_labels_, rows(), "male types");
  check_labels(col_labels_, cols(), "female types");
}

GainsMatrix GainsMatrix::from_log_gains(const Matrix& log_gains, std::vector<std::string> row_labels,
                                        std::vector<std::string> col_labels) {
  Matrix pi(log_gains.rows(), log_gains.cols());
  for (Eigen::Index i = 0; i < log_gains.rows(); ++i) {
    for (Eigen::Index j = 0; j < log_gains.cols(); ++j) {
      const double v = log_gains(i, j);
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw InputError("log-gains entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                         ") is not a real number");
      }
      pi(i, j) = std::exp(v);
    }
  }
  return GainsMatrix(std::move(pi), std::move(row_labels), std::move(col_labels));
}

bool GainsMatrix::row_vanishes(std::size_t i) const {
  return (entries_.row(static_cast<Eigen::Index>(i)).array() == 0.0).all();
}

bool GainsMatrix::col_vanishes(std::size_t j) const {
  return (entries_.col(static_cast<Eigen::Index>(j)).array() == 0.0).all();
}

PopulationVector::PopulationVector(Vector counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw InputError("population vector needs at least one male and one female type");
  for (Eigen::Index k = 0; k < counts_.size(); ++k) {
    const double v = counts_(k);
    if (!std::isfinite(v) || v <= 0.0) {
      std::ostringstream msg;
      msg << "population entry " << k + 1 << " = " << v << " is not a finite positive number";
      throw InputError(msg.str());
    }
  }
}

ValidatedMarket validate_market(GainsMatrix gains, PopulationVector population) {
  if (gains.rows() + gains.cols() != population.size()) {
    std::ostringstream msg;
    msg << "dimension mismatch: gains is " << gains.rows() << "x" << gains.cols() << " but population has "
        << population.size() << " entries (expected " << gains.rows() + gains.cols() << ")";
    throw InputError(msg.str());
  }
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < gains.rows(); ++i) {
    if (gains.row_vanishes(i)) flags.push_back("row " + std::to_string(i + 1) + " of Pi is zero");
  }
  for (std::size_t j = 0; j < gains.cols(); ++j) {
    if (gains.col_vanishes(j)) flags.push_back("column " + std::to_string(j + 1) + " of Pi is zero");
  }
  return ValidatedMarket{std::move(gains), std::move(population), std::move(flags)};
}

AmplitudeVector AmplitudeVector::from_beta(Vector beta) {
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (!(beta(k) > 0.0) || !std::isfinite(beta(k))) throw InputError("amplitudes must be finite and positive");
  }
  Vector log_beta = beta.array().log().matrix();
  return AmplitudeVector(std::move(beta), std::move(log_beta));
}

AmplitudeVector AmplitudeVector::from_log(Vector log_beta) {
  for (Eigen::Index k = 0; k < log_beta.size(); ++k) {
    if (!std::isfinite(log_beta(k))) throw InputError("log-amplitudes must be finite");
  }
  Vector beta = log_beta.array().exp().matrix();
  return AmplitudeVector(std::move(beta), std::move(log_beta));
}

Vector MaritalDistribution::implied_population() const {
  Vector nu(single_men.size() + single_women.size());
  nu.head(single_men.size()) = single_men + married.rowwise().sum();
  nu.tail(single_women.size()) = single_women + married.colwise().sum().transpose();
  return nu;
}

ClearingReport check_distribution(const MaritalDistribution& mu, const ValidatedMarket& market,
                                  double tolerance) {
  const auto I = static_cast<Eigen::Index>(market.num_men_types());
  const auto J = static_cast<Eigen::Index>(market.num_women_types());
  const Vector& nu = market.population.counts();
  const Matrix& pi = market.gains.entries();

  auto scaled = [](double lhs, double rhs) { return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)); };

  ClearingReport report;
  report.min_entry = std::min({mu.married.minCoeff(), mu.single_men.minCoeff(), mu.single_women.minCoeff()});
  for (Eigen::Index i = 0; i < I; ++i) {
    report.row_error = std::max(report.row_error, scaled(mu.single_men(i) + mu.married.row(i).sum(), nu(i)));
  }
  for (Eigen::Index j = 0; j < J; ++j) {
    report.column_error =
        std::max(report.column_error, scaled(mu.single_women(j) + mu.married.col(j).sum(), nu(I + j)));
  }
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const double rhs = pi(i, j) * std::sqrt(mu.single_men(i) * mu.single_women(j));
      report.identity_error = std::max(report.identity_error, scaled(mu.married(i, j), rhs));
    }
  }
  report.passed = report.min_entry >= 0.0 && report.row_error <= tolerance && report.column_error <= tolerance &&
                  report.identity_error <= tolerance;
  return report;
}

Vector residual(const Vector& beta, const ValidatedMarket& market) {
  const auto I = static_cast<Eigen::Index>(market.num_men_types());
  const auto J = static_cast<Eigen::Index>(market.num_women_types());
  if (beta.size() != I + J) throw InputError("amplitude vector has the wrong length");
  const Matrix& pi = market.gains.entries();
  const auto men = beta.head(I);
  const auto women = beta.tail(J);

  Vector r(I + J);
  r.head(I) = men.array().square() + men.array() * (pi * women).array();
  r.tail(J) = women.array().square() + women.array() * (pi.transpose() * men).array();
  return r - market.population.counts();
}

MaritalDistribution marriage_distribution(const AmplitudeVector& beta, const GainsMatrix& gains) {
  const auto I = static_cast<Eigen::Index>(gains.rows());
  const auto J = static_cast<Eigen::Index>(gains.cols());
  if (static_cast<Eigen::Index>(beta.size()) != I + J) throw InputError("amplitude vector has the wrong length");
  const Vector men = beta.beta().head(I);
  const Vector women = beta.beta().tail(J);

  MaritalDistribution mu;
  mu.married = (men * women.transpose()).cwiseProduct(gains.entries());
  mu.single_men = men.array().square();
  mu.single_women = women.array().square();
  return mu;
}

double objective_E(const Vector& beta, const ValidatedMarket& market) {
  const auto I = static_cast<Eigen::Index>(market.num_men_types());
  const auto J = static_cast<Eigen::Index>(market.num_women_types());
  if (beta.size() != I + J) throw InputError("amplitude vector has the wrong length");
  if ((beta.array() == 0.0).any()) return std::numeric_limits<double>::infinity();

  const double quadratic = 0.5 * beta.squaredNorm();
  const double coupling = beta.head(I).dot(market.gains.entries() * beta.tail(J));
  const double entropy = market.population.counts().dot(beta.array().abs().log().matrix());
  return quadratic + coupling - entropy;
}

namespace {

void check_bound(const Vector& b, double bound) {
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    if (!std::isfinite(b(k)) || std::abs(b(k)) > bound) {
      std::ostringstream msg;
      msg << "log-amplitude b[" << k + 1 << "] = " << b(k) << " exceeds the bound " << bound
          << "; rescale the population counts";
      throw ScalingError(msg.str());
    }
  }
}

}  // namespace

double dual_value(const Vector& b, const GainsMatrix& gains, double bound) {
  const auto I = static_cast<Eigen::Index>(gains.rows());
  const auto J = static_cast<Eigen::Index>(gains.cols());
  if (b.size() != I + J) throw InputError("log-amplitude vector has the wrong length");
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    if (!std::isfinite(b(k)) || std::abs(b(k)) > bound) return std::numeric_limits<double>::infinity();
  }
  const Vector beta = b.array().exp();
  const double value = 0.5 * beta.squaredNorm() + beta.head(I).dot(gains.entries() * beta.tail(J));
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

DualObjective objective_H(const Vector& b, const GainsMatrix& gains, double bound) {
  const auto I = static_cast<Eigen::Index>(gains.rows());
  const auto J = static_cast<Eigen::Index>(gains.cols());
  if (b.size() != I + J) throw InputError("log-amplitude vector has the wrong length");
  check_bound(b, bound);

  const Matrix& pi = gains.entries();
  const Vector beta = b.array().exp();
  const auto men = beta.head(I);
  const auto women = beta.tail(J);

  // Cross-sex exposure of each type: sum over the opposite sex of Pi * beta.
  Vector exposure(I + J);
  exposure.head(I) = pi * women;
  exposure.tail(J) = pi.transpose() * men;

  DualObjective out;
  out.value = 0.5 * beta.squaredNorm() + men.dot(exposure.head(I));
  out.gradient = beta.array().square() + beta.array() * exposure.array();

  Matrix inner = Matrix::Zero(I + J, I + J);
  inner.diagonal() = (2.0 + exposure.array() / beta.array()).matrix();
  inner.topRightCorner(I, J) = pi;
  inner.bottomLeftCorner(J, I) = pi.transpose();
  out.hessian = beta.asDiagonal() * inner * beta.asDiagonal();
  out.scaled_hessian = std::move(inner);

  if (!std::isfinite(out.value) || !out.hessian.allFinite()) {
    throw ScalingError("dual objective overflowed; rescale the population counts");
  }
  return out;
}

}  // namespace choosiow
