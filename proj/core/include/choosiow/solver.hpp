#ifndef CHOOSIOW_SOLVER_HPP
#define CHOOSIOW_SOLVER_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "choosiow/market.hpp"

namespace choosiow {

struct SolverOptions {
  /// Stop once ||grad H(b) - nu|| <= gradient_tolerance * ||nu||.
  double gradient_tolerance = 1e-10;
  int max_iterations = 200;
  double line_search_shrink = 0.5;
  double armijo_constant = 1e-4;
  /// Cap on the infinity norm of a Newton step in b-space.
  double max_step = 10.0;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

/// Raised when Newton iteration stalls or runs out of iterations.
class SolverError : public std::runtime_error {
 public:
  enum class Kind { NotConverged, FactorizationFailed, LineSearchFailed };

  SolverError(Kind kind, const std::string& what, Vector iterate, double residual_norm, int iterations)
      : std::runtime_error(what),
        kind_(kind),
        iterate_(std::move(iterate)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  Kind kind() const { return kind_; }
  const Vector& iterate() const { return iterate_; }
  double residual_norm() const { return residual_norm_; }
  int iterations() const { return iterations_; }

 private:
  Kind kind_;
  Vector iterate_;
  double residual_norm_;
  int iterations_;
};

struct Equilibrium {
  AmplitudeVector amplitudes;
  MaritalDistribution distribution;
  ValidatedMarket market;
  double residual_norm = 0.0;
  int iterations = 0;
  /// H(b) - <nu, b> at the solution, i.e. minus the Legendre transform H*(nu).
  double objective_value = 0.0;
  /// Objective after every accepted iterate, starting with the initial guess.
  std::vector<double> objective_trace;
};

/// b0_k = log(nu_k) / 2, the exact solution when Pi vanishes.
Vector initial_guess(const PopulationVector& population);

/// Damped Newton minimisation of H(b) - <nu, b> from initial_guess().
Equilibrium solve(const ValidatedMarket& market, const SolverOptions& options = {});

/// Same as solve() but from an arbitrary starting point.
Equilibrium solve_from(const ValidatedMarket& market, const Vector& start, const SolverOptions& options = {});

/// A market restricted to its populated types plus the map back to the original indices.
struct ReducedMarket {
  ValidatedMarket market;
  std::vector<std::size_t> men;    // original male indices kept, in order
  std::vector<std::size_t> women;  // original female indices kept, in order
  std::size_t original_men = 0;
  std::size_t original_women = 0;

  bool is_identity() const { return men.size() == original_men && women.size() == original_women; }
};

/// Drops zero-population types. Throws InputError if every type on a side is empty.
ReducedMarket reduce_unpopulated(const GainsMatrix& gains, const Vector& raw_population);

/// Re-embeds a reduced solution: dropped types get zero singles and zero marriages.
MaritalDistribution embed_distribution(const ReducedMarket& reduced, const MaritalDistribution& mu);

/// Re-embeds reduced amplitudes; dropped types have no amplitude.
std::vector<std::optional<double>> embed_amplitudes(const ReducedMarket& reduced, const Vector& beta);

}  // namespace choosiow

#endif  // CHOOSIOW_SOLVER_HPP
