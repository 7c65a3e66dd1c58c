#ifndef CHOOSIOW_MARKET_HPP
#define CHOOSIOW_MARKET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace choosiow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest admissible |b_k| for a log-amplitude. e^{2b} stays finite in
/// double precision well past this point.
inline constexpr double kLogAmplitudeBound = 350.0;

/// Default relative tolerance for clearing checks: |lhs - rhs| <= tol * max(1, |rhs|).
inline constexpr double kDefaultClearingTolerance = 1e-9;

/// Malformed or inconsistent market data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A log-amplitude left the representable range; rescale the populations.
class ScalingError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// I x J matrix of exponentiated marriage gains Pi_ij = exp(pi_ij).
class GainsMatrix {
 public:
  /// Labels default to "m1..mI" and "f1..fJ" when empty.
  explicit GainsMatrix(Matrix entries, std::vector<std::string> row_labels = {},
                       std::vector<std::string> col_labels = {});

  /// Builds Pi = exp(pi) from log-gains. -inf maps to a zero gain.
  static GainsMatrix from_log_gains(const Matrix& log_gains,
                                    std::vector<std::string> row_labels = {},
                                    std::vector<std::string> col_labels = {});

  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  const Matrix& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  bool row_vanishes(std::size_t i) const;
  bool col_vanishes(std::size_t j) const;

 private:
  Matrix entries_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

/// Population counts nu = [m | f]; every entry strictly positive.
class PopulationVector {
 public:
  explicit PopulationVector(Vector counts);

  std::size_t size() const { return static_cast<std::size_t>(counts_.size()); }
  const Vector& counts() const { return counts_; }
  double operator[](std::size_t k) const { return counts_(static_cast<Eigen::Index>(k)); }

 private:
  Vector counts_;
};

/// A market whose gains and population have been cross-checked.
struct ValidatedMarket {
  GainsMatrix gains;
  PopulationVector population;
  /// Human-readable notes about vanishing rows or columns of Pi.
  std::vector<std::string> flags;

  std::size_t num_men_types() const { return gains.rows(); }
  std::size_t num_women_types() const { return gains.cols(); }
  std::size_t num_types() const { return gains.rows() + gains.cols(); }
  /// True when no row or column of Pi is identically zero.
  bool nondegenerate() const { return flags.empty(); }
};

/// Rejects dimension mismatches and invalid entries; flags (but accepts)
/// all-zero rows and columns of Pi.
ValidatedMarket validate_market(GainsMatrix gains, PopulationVector population);

/// beta_k = sqrt(singles of type k) together with b_k = log beta_k.
class AmplitudeVector {
 public:
  static AmplitudeVector from_beta(Vector beta);
  static AmplitudeVector from_log(Vector log_beta);

  const Vector& beta() const { return beta_; }
  const Vector& log_beta() const { return log_beta_; }
  std::size_t size() const { return static_cast<std::size_t>(beta_.size()); }

 private:
  AmplitudeVector(Vector beta, Vector log_beta)
      : beta_(std::move(beta)), log_beta_(std::move(log_beta)) {}

  Vector beta_;
  Vector log_beta_;
};

struct MaritalDistribution {
  Matrix married;        // mu_ij
  Vector single_men;     // mu_i0
  Vector single_women;   // mu_0j

  /// Row sums plus singles, stacked as [men | women].
  Vector implied_population() const;
};

/// Largest scaled violations of the market-clearing and equilibrium identities.
struct ClearingReport {
  double row_error = 0.0;       // mu_i0 + sum_j mu_ij = m_i
  double column_error = 0.0;    // mu_0j + sum_i mu_ij = f_j
  double identity_error = 0.0;  // mu_ij = Pi_ij sqrt(mu_i0 mu_0j)
  double min_entry = 0.0;
  bool passed = false;
};

ClearingReport check_distribution(const MaritalDistribution& mu, const ValidatedMarket& market,
                                  double tolerance = kDefaultClearingTolerance);

/// Left-hand sides of the quadratic equilibrium system. Zero iff beta is the equilibrium.
Vector residual(const Vector& beta, const ValidatedMarket& market);
inline Vector residual(const AmplitudeVector& beta, const ValidatedMarket& market) {
  return residual(beta.beta(), market);
}

/// mu_ij = beta_i beta_{I+j} Pi_ij, mu_i0 = beta_i^2, mu_0j = beta_{I+j}^2.
MaritalDistribution marriage_distribution(const AmplitudeVector& beta, const GainsMatrix& gains);

/// The primal energy on R^{I+J}; +inf on the coordinate hyperplanes.
double objective_E(const Vector& beta, const ValidatedMarket& market);

struct DualObjective {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
  /// [[D_I, Pi], [Pi^T, D_J]]; hessian = diag(e^b) * scaled_hessian * diag(e^b).
  Matrix scaled_hessian;
};

/// Smooth strictly convex H(b) with gradient and Hessian.
///
/// The Hessian is assembled in the factored form Delta * [[D_I, Pi], [Pi^T, D_J]] * Delta,
/// Delta = diag(e^b), where (D_I)_ii = 2 + sum_j Pi_ij beta_{I+j} / beta_i and likewise
/// for D_J. Throws ScalingError if any |b_k| exceeds `bound`.
DualObjective objective_H(const Vector& b, const GainsMatrix& gains,
                          double bound = kLogAmplitudeBound);

/// Value of H alone; +inf when a coordinate is out of bounds or the sum overflows.
double dual_value(const Vector& b, const GainsMatrix& gains, double bound = kLogAmplitudeBound);

/// |lhs - rhs| <= tol * max(1, |rhs|).
inline bool within_tolerance(double lhs, double rhs, double tol) {
  const double scale = std::max(1.0, std::abs(rhs));
  return std::abs(lhs - rhs) <= tol * scale;
}

}  // namespace choosiow

#endif  // CHOOSIOW_MARKET_HPP
