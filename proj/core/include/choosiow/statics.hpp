#ifndef CHOOSIOW_STATICS_HPP
#define CHOOSIOW_STATICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "choosiow/market.hpp"
#include "choosiow/solver.hpp"

namespace choosiow {

/// Dense row-major I x J x K array; element (i, j, k) is a derivative of an
/// (i, j) quantity with respect to parameter k.
template <typename T>
class Array3 {
 public:
  Array3() = default;
  Array3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
      : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n1_ + j) * n2_ + k]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * n1_ + j) * n2_ + k]; }

  std::size_t dim0() const { return n0_; }
  std::size_t dim1() const { return n1_; }
  std::size_t dim2() const { return n2_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Array3&) const = default;

 private:
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<T> data_;
};

/// How strictly the sign pattern is enforced. Markets with a vanishing row
/// or column of Pi only satisfy the non-strict versions.
enum class SignMode { Strict, Boundary };

struct SignViolation {
  std::string rule;  // "cross-sex-negative", "same-sex-lower-bound", "cauchy-schwarz"
  std::size_t k = 0;
  std::size_t l = 0;
  double value = 0.0;  // quantity that violated the rule
  double bound = 0.0;  // what it was compared against

  bool operator==(const SignViolation&) const = default;
};

struct SignCheck {
  SignMode mode = SignMode::Strict;
  bool passed = true;
  std::size_t comparisons = 0;
  std::vector<SignViolation> failures;
};

struct ConjectureObservation {
  std::size_t i = 0;
  std::size_t j = 0;
  double male_sum = 0.0;    // r_ii + r_{i,I+j}
  double female_sum = 0.0;  // r_{I+j,I+j} + r_{I+j,i}
  bool male_positive = false;
  bool female_positive = false;
};

struct SpectralDiagnostic {
  double lambda_max = 0.0;
  bool pass = false;
  int iterations = 0;
};

struct StaticsReport {
  Matrix r_matrix;  // r_kl = (1 / beta_k^2) d beta_k^2 / d nu_l
  Matrix d_beta;    // d beta_k / d nu_l
  double spectral_radius = 0.0;
  bool spectral_pass = false;
  SignCheck sign_check;
  std::vector<ConjectureObservation> conjecture_probe;
};

struct GainsSensitivity {
  Array3<double> d_beta;                       // d beta_k / d Pi_ij
  Array3<std::optional<double>> d_log_beta;    // absent where Pi_ij == 0
};

struct TransferReport {
  Matrix transfer_index;                // log(mu_i0 / mu_0j) = 2 tau_ij + c_ij
  Array3<double> transfer_derivatives;  // d tau_ij / d nu_k
  std::optional<Matrix> tau;            // only when c is supplied
};

struct ParticipationRecord {
  double nonparticipation = 0.0;  // s_k = beta_k^2 / nu_k
  double derivative = 0.0;        // d s_k / d nu_k
  bool boundary = false;          // type k has no positive gains
};

class StaticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R = 2 (D^2 H)^{-1} at the solution, with the sign check, spectral
/// diagnostic and conjecture probe filled in.
StaticsReport statics_matrix(const Equilibrium& eq);

/// Checks the substitution-matrix sign structure. `singles` holds beta_k^2 and
/// `population` holds nu_k; the first `men` indices form the male block.
SignCheck verify_sign_pattern(const Matrix& r, std::size_t men, std::size_t women, const Vector& singles,
                              const Vector& population, SignMode mode);
SignCheck verify_sign_pattern(const StaticsReport& report, const Equilibrium& eq);

GainsSensitivity gains_sensitivity(const Equilibrium& eq, const StaticsReport& report);

/// d log mu_ij / d nu_k; absent where mu_ij == 0.
Array3<std::optional<double>> marriage_elasticity(const Equilibrium& eq, const StaticsReport& report);

TransferReport transfer_analysis(const Equilibrium& eq, const StaticsReport& report,
                                 const std::optional<Matrix>& c = std::nullopt);

std::vector<ParticipationRecord> participation_analysis(const Equilibrium& eq, const StaticsReport& report);

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

/// Perron root of A = D_I^{-1} Pi D_J^{-1} Pi^T, with D_I = diag(1 + nu_i / beta_i^2)
/// and D_J likewise, by power iteration. Throws StaticsError if it does not settle.
SpectralDiagnostic spectral_diagnostic(const Equilibrium& eq, const PowerIterationOptions& options = {});

/// Records (never asserts) whether each diagonal entry of R dominates the
/// cross-sex entries paired with it.
std::vector<ConjectureObservation> conjecture_probe(const StaticsReport& report, std::size_t men,
                                                    std::size_t women);

/// Largest relative discrepancies between analytic derivatives and central
/// differences of re-solved markets.
struct FiniteDifferenceReport {
  double r_matrix = 0.0;
  double d_beta = 0.0;
  double gains_sensitivity = 0.0;
  double marriage_elasticity = 0.0;
  double transfer_derivatives = 0.0;
  double participation = 0.0;
  std::size_t resolves = 0;

  double worst() const;
};

/// Re-solves at nu_k (1 +- step) and Pi_ij +- step (1 + Pi_ij). Entries where a
/// negative Pi would result use a one-sided second-order stencil instead.
FiniteDifferenceReport finite_difference_check(const ValidatedMarket& market, double step = 1e-5,
                                               const SolverOptions& options = {});

}  // namespace choosiow

#endif  // CHOOSIOW_STATICS_HPP
