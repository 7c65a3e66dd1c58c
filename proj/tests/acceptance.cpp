// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Cholesky>

#include "choosiow/choosiow.hpp"
#include "choosiow/cli/commands.hpp"
#include "oracles.hpp"

using namespace choosiow;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct Outcome {
  bool passed = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("threw: ") + e.what()};
  }
  const double elapsed = ms_since(start);
  if (!outcome.passed) ++failures;
  std::printf("[%s] criterion %2d  %-34s %9.1f ms  %s\n", outcome.passed ? "PASS" : "FAIL", id, title.c_str(), elapsed,
              outcome.detail.c_str());
  std::fflush(stdout);
}

std::vector<ValidatedMarket> random_markets(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<ValidatedMarket> out;
  for (int k = 0; k < count; ++k) out.push_back(oracle::random_market(rng));
  return out;
}

// Shared between criteria 2, 3, 4, 6 and 7.
std::vector<ValidatedMarket> population_markets;
std::vector<Equilibrium> population_solutions;

Outcome closed_form() {
  Outcome out;
  std::ostringstream detail;
  double worst = 0.0;
  double slowest = 0.0;
  for (const auto& [men, women] : {std::pair{100.0, 100.0}, std::pair{4.0, 1.0}}) {
    const ValidatedMarket market = oracle::make_market(Matrix::Ones(1, 1), Vector{{men, women}});
    const oracle::OneByOne expected = oracle::one_by_one(1.0, men, women);
    const auto start = Clock::now();
    const Equilibrium eq = solve(market);
    const double elapsed = ms_since(start);
    slowest = std::max(slowest, elapsed);
    const auto& mu = eq.distribution;
    for (const double e : {rel(mu.married(0, 0), expected.married), rel(mu.single_men(0), expected.single_man),
                           rel(mu.single_women(0), expected.single_woman),
                           rel(eq.amplitudes.beta()(0), std::sqrt(expected.single_man)),
                           rel(eq.amplitudes.beta()(1), std::sqrt(expected.single_woman))}) {
      worst = std::max(worst, e);
    }
    if (elapsed >= 10.0) out.passed = false;
  }
  // Hand-solved values as printed: beta = sqrt(50), mu = 50; mu = 0.8, singles 3.2 and 0.2.
  worst = std::max({worst, rel(oracle::one_by_one(1.0, 100, 100).married, 50.0),
                    rel(oracle::one_by_one(1.0, 4, 1).married, 0.8), rel(oracle::one_by_one(1.0, 4, 1).single_man, 3.2),
                    rel(oracle::one_by_one(1.0, 4, 1).single_woman, 0.2)});
  if (worst > 1e-9) out.passed = false;
  detail << "max rel err " << worst << " (tol 1e-9), slowest solve " << slowest << " ms (limit 10)";
  out.detail = detail.str();
  return out;
}

Outcome existence_uniqueness() {
  const auto start = Clock::now();
  population_markets = random_markets(20240601, 500);
  int max_iterations = 0;
  for (const auto& market : population_markets) {
    population_solutions.push_back(solve(market));
    max_iterations = std::max(max_iterations, population_solutions.back().iterations);
  }
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  double spread = 0.0;
  for (std::size_t m = 0; m < 50; ++m) {
    const ValidatedMarket& market = population_markets[m];
    const Vector& reference = population_solutions[m].amplitudes.beta();
    for (int restart = 0; restart < 20; ++restart) {
      Vector start_point = initial_guess(market.population);
      for (Eigen::Index k = 0; k < start_point.size(); ++k) start_point(k) += shift(rng);
      const Equilibrium eq = solve_from(market, start_point);
      max_iterations = std::max(max_iterations, eq.iterations);
      spread = std::max(spread, (eq.amplitudes.beta() - reference).cwiseAbs().maxCoeff());
    }
  }
  const double elapsed = ms_since(start) / 1000.0;
  std::ostringstream detail;
  detail << "500 markets solved, max iterations " << max_iterations << " (limit 200), restart spread " << spread
         << " (tol 1e-8), " << elapsed << " s (limit 60)";
  return {max_iterations <= 200 && spread <= 1e-8 && elapsed < 60.0, detail.str()};
}

Outcome clearing() {
  if (population_solutions.size() != population_markets.size() || population_markets.empty()) {
    return {false, "criterion 2 did not produce solutions"};
  }
  double worst = 0.0;
  for (std::size_t m = 0; m < population_markets.size(); ++m) {
    const auto& market = population_markets[m];
    const auto& mu = population_solutions[m].distribution;
    const Matrix& pi = market.gains.entries();
    const Vector& nu = market.population.counts();
    const auto I = mu.married.rows();
    for (Eigen::Index i = 0; i < I; ++i) worst = std::max(worst, rel(mu.single_men(i) + mu.married.row(i).sum(), nu(i)));
    for (Eigen::Index j = 0; j < mu.married.cols(); ++j) {
      worst = std::max(worst, rel(mu.single_women(j) + mu.married.col(j).sum(), nu(I + j)));
      for (Eigen::Index i = 0; i < I; ++i) {
        worst = std::max(worst, rel(mu.married(i, j), pi(i, j) * std::sqrt(mu.single_men(i) * mu.single_women(j))));
      }
    }
    if ((mu.married.array() < 0).any() || (mu.single_men.array() < 0).any() || (mu.single_women.array() < 0).any()) {
      return {false, "negative count in market " + std::to_string(m)};
    }
  }
  std::ostringstream detail;
  detail << "max rel err " << worst << " over 500 markets (tol 1e-9)";
  return {worst <= 1e-9, detail.str()};
}

Outcome substitution_structure() {
  if (population_solutions.empty()) return {false, "criterion 2 did not produce solutions"};
  double asym = 0.0;
  std::size_t violations = 0;
  std::size_t not_spd = 0;
  std::size_t checked = 0;
  for (const auto& eq : population_solutions) {
    if (!(eq.market.gains.entries().array() > 0.0).all()) continue;
    ++checked;
    const Matrix r = statics_matrix(eq).r_matrix;
    const auto I = static_cast<Eigen::Index>(eq.market.num_men_types());
    const Eigen::Index n = r.rows();
    const Vector& beta = eq.amplitudes.beta();
    const Vector& nu = eq.market.population.counts();
    asym = std::max(asym, (r - r.transpose()).cwiseAbs().maxCoeff() / r.cwiseAbs().maxCoeff());
    if (Eigen::LLT<Matrix>(r).info() != Eigen::Success) ++not_spd;
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index l = 0; l < n; ++l) {
        const bool same_sex = (k < I) == (l < I);
        if (!same_sex) {
          if (!(r(k, l) < 0.0)) ++violations;
          continue;
        }
        const double delta = k == l ? 1.0 : 0.0;
        if (!(0.5 * (beta(k) * beta(k) + nu(k)) * r(k, l) > delta)) ++violations;
        if (k != l && !(r(k, l) * r(k, l) < r(k, k) * r(l, l))) ++violations;
      }
      for (Eigen::Index l = 0; l < n; ++l) {
        if (k != l && (k < I) != (l < I) && !(r(k, l) * r(k, l) < r(k, k) * r(l, l))) ++violations;
      }
    }
  }
  std::ostringstream detail;
  detail << checked << " markets, asymmetry " << asym << " (tol 1e-9), Cholesky failures " << not_spd
         << ", sign/Cauchy-Schwarz violations " << violations;
  return {checked > 0 && asym <= 1e-9 && not_spd == 0 && violations == 0, detail.str()};
}

Outcome derivative_oracle() {
  const auto start = Clock::now();
  const auto markets = random_markets(99, 50);
  oracle::DerivativeGaps worst;
  for (const auto& market : markets) {
    const auto g = oracle::derivative_gaps(market, 1e-5);
    worst.r_matrix = std::max(worst.r_matrix, g.r_matrix);
    worst.d_beta_d_gains = std::max(worst.d_beta_d_gains, g.d_beta_d_gains);
    worst.elasticity = std::max(worst.elasticity, g.elasticity);
    worst.transfer = std::max(worst.transfer, g.transfer);
    worst.participation = std::max(worst.participation, g.participation);
  }
  const double elapsed = ms_since(start) / 1000.0;
  std::ostringstream detail;
  detail << "max rel err R " << worst.r_matrix << ", dbeta/dPi " << worst.d_beta_d_gains << ", dlog mu/dnu "
         << worst.elasticity << ", transfer " << worst.transfer << ", participation " << worst.participation
         << " (tol 1e-3), " << elapsed << " s (limit 120)";
  return {worst.worst() <= 1e-3 && elapsed < 120.0, detail.str()};
}

Outcome comparative_statics_signs() {
  if (population_solutions.empty()) return {false, "criterion 2 did not produce solutions"};
  double min_tau = std::numeric_limits<double>::infinity();
  double min_s = std::numeric_limits<double>::infinity();
  double min_fd_tau = std::numeric_limits<double>::infinity();
  double min_fd_s = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (std::size_t m = 0; m < population_solutions.size(); ++m) {
    const auto& eq = population_solutions[m];
    if (!(eq.market.gains.entries().array() > 0.0).all()) continue;
    ++checked;
    const StaticsReport statics = statics_matrix(eq);
    const TransferReport transfers = transfer_analysis(eq, statics);
    for (std::size_t i = 0; i < eq.market.num_men_types(); ++i) {
      for (std::size_t j = 0; j < eq.market.num_women_types(); ++j) {
        min_tau = std::min(min_tau, transfers.transfer_derivatives(i, j, i));
      }
    }
    for (const auto& p : participation_analysis(eq, statics)) min_s = std::min(min_s, p.derivative);
    const auto fd = oracle::derivative_gaps(population_markets[m], 1e-5, false);
    min_fd_tau = std::min(min_fd_tau, fd.min_fd_own_transfer);
    min_fd_s = std::min(min_fd_s, fd.min_fd_own_participation);
  }
  std::ostringstream detail;
  detail << checked << " markets; min d tau_ij/d nu_i analytic " << min_tau << " fd " << min_fd_tau
         << "; min d s_k/d nu_k analytic " << min_s << " fd " << min_fd_s;
  return {checked > 0 && min_tau > 0 && min_s > 0 && min_fd_tau > 0 && min_fd_s > 0, detail.str()};
}

Outcome spectral_bound() {
  if (population_solutions.empty()) return {false, "criterion 2 did not produce solutions"};
  double largest = 0.0;
  double oracle_gap = 0.0;
  std::size_t checked = 0;
  for (const auto& eq : population_solutions) {
    if (!eq.market.nondegenerate()) continue;
    ++checked;
    const double lambda = spectral_diagnostic(eq).lambda_max;
    largest = std::max(largest, lambda);
    oracle_gap = std::max(oracle_gap, std::abs(lambda - oracle::spectral_radius(eq)));
  }
  const Equilibrium fixture = solve(oracle::make_market(Matrix::Ones(1, 1), Vector{{100.0, 100.0}}));
  const double symmetric = spectral_diagnostic(fixture).lambda_max;
  const double fixture_err = std::abs(symmetric - 1.0 / 9.0);
  std::ostringstream detail;
  detail << checked << " markets, largest lambda " << largest << " (< 1), gap to dense eigensolver " << oracle_gap
         << "; 1x1 fixture |lambda - 1/9| = " << fixture_err << " (tol 1e-10)";
  return {checked > 0 && largest < 1.0 && fixture_err <= 1e-10, detail.str()};
}

Outcome gumbel_validation() {
  const auto start = Clock::now();
  UniformSource source(12345);
  double mean = 0.0;
  double m2 = 0.0;
  const int n = 1'000'000;
  for (int k = 1; k <= n; ++k) {
    const double x = gumbel_sample(source);
    const double d = x - mean;
    mean += d / k;
    m2 += d * (x - mean);
  }
  const double variance = m2 / (n - 1);
  const double gamma = std::numbers::egamma;
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;

  UniformSource choice_source(2024);
  const SimulationResult sim = simulate_choices(ChoiceModel(Vector{{0.0, std::log(2.0)}}, 1.0), n, choice_source);
  const double choice_err = std::max(std::abs(sim.frequencies(0) - 1.0 / 3.0), std::abs(sim.frequencies(1) - 2.0 / 3.0));

  double consistency = 0.0;
  for (const auto& nu : {Vector{{100.0, 100.0}}, Vector{{4.0, 1.0}}}) {
    UniformSource eq_source(31337);
    const Equilibrium eq = solve(oracle::make_market(Matrix::Ones(1, 1), nu));
    consistency = std::max(consistency, equilibrium_consistency(eq, n, eq_source).max_deviation);
  }
  const double elapsed = ms_since(start) / 1000.0;
  const bool ok = std::abs(mean - 0.5772) <= 0.005 && std::abs(variance - pi2_6) <= 0.02 && choice_err <= 0.005 &&
                  consistency < 0.005 && elapsed < 30.0;
  std::ostringstream detail;
  detail << "mean " << mean << " (gamma " << gamma << "), variance " << variance << " (" << pi2_6
         << "), logit freq err " << choice_err << ", consistency " << consistency << ", " << elapsed
         << " s (limit 30)";
  return {ok, detail.str()};
}

Outcome sigma_limits() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  double cold = 0.0;
  double hot = 0.0;
  int cases = 0;
  while (cases < 200) {
    Vector eta(size(rng));
    for (Eigen::Index k = 0; k < eta.size(); ++k) eta(k) = value(rng);
    Vector sorted = eta;
    std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
    if (sorted(0) - sorted(1) < 0.1) continue;
    ++cases;
    const Vector limit = sigma_limit(ChoiceModel(eta, 1.0));
    cold = std::max(cold, (choice_probabilities(ChoiceModel(eta, 1e-4)) - limit).cwiseAbs().maxCoeff());
    const Vector uniform = Vector::Constant(eta.size(), 1.0 / static_cast<double>(eta.size()));
    hot = std::max(hot, (choice_probabilities(ChoiceModel(eta, 1e3)) - uniform).cwiseAbs().maxCoeff());
  }
  std::ostringstream detail;
  detail << cases << " utility vectors; sigma=1e-4 vs argmax " << cold << " (tol 1e-6), sigma=1e3 vs uniform " << hot
         << " (tol 1e-3)";
  return {cold <= 1e-6 && hot <= 1e-3, detail.str()};
}

Outcome cli_round_trip() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("choosiow_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string market = (dir / "market.txt").string();
  std::ofstream(market) << "format_version = 1\n"
                           "[types.male]\nm1 m2 m3 m4\n[types.female]\nf1 f2 f3\n"
                           "[gains mode=Pi]\n0.7 2.1 0.05\n1.3 0.4 3.9\n2.2 1.0 0.6\n4.4 0.001 1.7\n"
                           "[population]\nm1 120\nm2 3400\nm3 15\nm4 800\nf1 60\nf2 2900\nf3 410\n";

  cli::CommandOptions solve_opts;
  solve_opts.command = "solve";
  solve_opts.input = market;
  const cli::CommandResult solved = cli::run_subcommand(solve_opts);
  if (solved.exit_code != 0) return {false, "solve exited " + std::to_string(solved.exit_code)};
  const std::string report_path = (dir / "solve.json").string();
  std::ofstream(report_path) << cli::serialize_report(solved.report);

  cli::CommandOptions est_opts;
  est_opts.command = "estimate-gains";
  est_opts.input = report_path;
  const cli::CommandResult estimated = cli::run_subcommand(est_opts);
  if (estimated.exit_code != 0 || !estimated.report.estimate) return {false, "estimate-gains failed"};
  const auto& echo = solved.report.echo->gains;
  double worst = 0.0;
  for (std::size_t i = 0; i < echo.size(); ++i) {
    for (std::size_t j = 0; j < echo[i].size(); ++j) {
      const auto& g = estimated.report.estimate->gains[i][j];
      worst = std::max(worst, g ? rel(*g, echo[i][j]) : 1.0);
    }
  }

  cli::CommandOptions sim_opts = solve_opts;
  sim_opts.command = "simulate";
  sim_opts.seed = 424242;
  sim_opts.samples = 20000;
  const std::string first = cli::serialize_report(cli::run_subcommand(sim_opts).report);
  const std::string second = cli::serialize_report(cli::run_subcommand(sim_opts).report);
  fs::remove_all(dir);

  std::ostringstream detail;
  detail << "Pi recovered to max rel err " << worst << " (tol 1e-8); simulate reports "
         << (first == second ? "identical" : "DIFFER") << " across runs";
  return {worst <= 1e-8 && first == second, detail.str()};
}

}  // namespace

int main() {
  report(1, "closed-form regression", closed_form);
  report(2, "existence and uniqueness", existence_uniqueness);
  report(3, "market clearing and identity", clearing);
  report(4, "substitution matrix structure", substitution_structure);
  report(5, "derivative oracle", derivative_oracle);
  report(6, "own-effect signs", comparative_statics_signs);
  report(7, "spectral bound", spectral_bound);
  report(8, "Gumbel and logit validation", gumbel_validation);
  report(9, "sigma limits", sigma_limits);
  report(10, "CLI round trip", cli_round_trip);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
