#include "choosiow/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "choosiow/choice.hpp"
#include "choosiow/statics.hpp"

namespace choosiow::cli {

namespace {

constexpr double kClearingTolerance = 1e-9;
constexpr double kSymmetryTolerance = 1e-9;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kFiniteDifferenceTolerance = 1e-3;

Row to_row(const Vector& v) { return Row(v.data(), v.data() + v.size()); }

Grid to_grid(const Matrix& m) {
  Grid grid(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) grid[static_cast<std::size_t>(i)] = to_row(m.row(i).transpose());
  return grid;
}

template <typename T>
std::vector<std::vector<std::vector<T>>> to_cube(const Array3<T>& a) {
  std::vector<std::vector<std::vector<T>>> cube(a.dim0(), std::vector<std::vector<T>>(a.dim1(), std::vector<T>(a.dim2())));
  for (std::size_t i = 0; i < a.dim0(); ++i) {
    for (std::size_t j = 0; j < a.dim1(); ++j) {
      for (std::size_t k = 0; k < a.dim2(); ++k) cube[i][j][k] = a(i, j, k);
    }
  }
  return cube;
}

std::optional<double> to_number(std::string text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.erase(0, 1);
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> all_labels(const GainsMatrix& gains) {
  std::vector<std::string> labels = gains.row_labels();
  labels.insert(labels.end(), gains.col_labels().begin(), gains.col_labels().end());
  return labels;
}

struct Solved {
  ReducedMarket reduced;
  Equilibrium eq;
  EquilibriumBlock block;
};

SolverOptions solver_options(const CommandOptions& options) {
  SolverOptions out;
  out.gradient_tolerance = options.tolerance;
  out.max_iterations = options.max_iterations;
  out.validate();
  return out;
}

Solved solve_market(const MarketFile& file, const SolverOptions& options, std::vector<std::string>* notes) {
  const GainsMatrix gains(file.gains_matrix(), file.male_types, file.female_types);
  ReducedMarket reduced = reduce_unpopulated(gains, file.population_vector());
  Equilibrium eq = solve(reduced.market, options);

  EquilibriumBlock block;
  block.male_types = file.male_types;
  block.female_types = file.female_types;
  block.beta = embed_amplitudes(reduced, eq.amplitudes.beta());
  const MaritalDistribution full = embed_distribution(reduced, eq.distribution);
  block.married = to_grid(full.married);
  block.single_men = to_row(full.single_men);
  block.single_women = to_row(full.single_women);
  block.residual_norm = eq.residual_norm;
  block.iterations = eq.iterations;
  block.objective = eq.objective_value;
  const ClearingReport clearing = check_distribution(eq.distribution, reduced.market, kClearingTolerance);
  block.clearing = {clearing.row_error, clearing.column_error, clearing.identity_error, clearing.passed};
  const auto labels = all_labels(gains);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (file.populations[k] == 0.0) {
      block.dropped_types.push_back(labels[k]);
      if (notes) {
        notes->push_back("type '" + labels[k] +
                         "' has zero population; it was removed before solving and is reported with zero counts");
      }
    }
  }
  return Solved{std::move(reduced), std::move(eq), std::move(block)};
}

StaticsBlock statics_block(const Equilibrium& eq, const StaticsReport& report) {
  const auto labels = all_labels(eq.market.gains);
  const std::size_t I = eq.market.num_men_types();
  StaticsBlock block;
  block.types = labels;
  block.r_matrix = to_grid(report.r_matrix);
  block.d_beta_d_nu = to_grid(report.d_beta);
  const GainsSensitivity sens = gains_sensitivity(eq, report);
  block.d_beta_d_gains = to_cube(sens.d_beta);
  block.d_log_beta_d_gains = to_cube(sens.d_log_beta);
  block.marriage_elasticity = to_cube(marriage_elasticity(eq, report));
  const auto participation = participation_analysis(eq, report);
  for (std::size_t k = 0; k < participation.size(); ++k) {
    block.participation.push_back(
        {labels[k], participation[k].nonparticipation, participation[k].derivative, participation[k].boundary});
  }
  block.spectral = {report.spectral_radius, report.spectral_pass, eq.market.nondegenerate()};
  block.sign_check.mode = report.sign_check.mode == SignMode::Strict ? "strict" : "boundary";
  block.sign_check.passed = report.sign_check.passed;
  block.sign_check.comparisons = report.sign_check.comparisons;
  for (const auto& f : report.sign_check.failures) {
    block.sign_check.failures.push_back({f.rule, labels[f.k], labels[f.l], f.value, f.bound});
  }
  for (const auto& c : report.conjecture_probe) {
    block.conjecture_probe.push_back(
        {labels[c.i], labels[I + c.j], c.male_sum, c.female_sum, c.male_positive, c.female_positive});
  }
  return block;
}

std::optional<Matrix> reduced_c(const MarketFile& file, const ReducedMarket& reduced) {
  const auto c = file.c();
  if (!c) return std::nullopt;
  Matrix out(static_cast<Eigen::Index>(reduced.men.size()), static_cast<Eigen::Index>(reduced.women.size()));
  for (std::size_t a = 0; a < reduced.men.size(); ++a) {
    for (std::size_t b = 0; b < reduced.women.size(); ++b) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          (*c)(static_cast<Eigen::Index>(reduced.men[a]), static_cast<Eigen::Index>(reduced.women[b]));
    }
  }
  return out;
}

TransferBlock transfer_block(const Equilibrium& eq, const TransferReport& report) {
  TransferBlock block;
  block.male_types = eq.market.gains.row_labels();
  block.female_types = eq.market.gains.col_labels();
  block.types = all_labels(eq.market.gains);
  block.transfer_index = to_grid(report.transfer_index);
  block.derivatives = to_cube(report.transfer_derivatives);
  if (report.tau) block.tau = to_grid(*report.tau);
  return block;
}

/// Resolves a male or female type given by label or 1-based index.
std::size_t find_type(const std::vector<std::string>& labels, const std::string& key, const std::string& what) {
  const auto it = std::find(labels.begin(), labels.end(), key);
  if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
  if (ec == std::errc() && ptr == key.data() + key.size() && index >= 1 && index <= labels.size()) return index - 1;
  throw InputError("unknown " + what + " '" + key + "'");
}

std::pair<std::string, double> split_shock(const std::string& text, const std::string& flag) {
  const auto eq = text.rfind('=');
  if (eq == std::string::npos || eq == 0) throw InputError(flag + " expects TARGET=DELTA, got '" + text + "'");
  const auto delta = to_number(text.substr(eq + 1));
  if (!delta) throw InputError(flag + ": '" + text.substr(eq + 1) + "' is not a finite number");
  return {text.substr(0, eq), *delta};
}

std::vector<ShockEntry> apply_shocks(MarketFile& file, const CommandOptions& options) {
  std::vector<ShockEntry> shocks;
  std::vector<std::string> labels = file.male_types;
  labels.insert(labels.end(), file.female_types.begin(), file.female_types.end());
  for (const auto& text : options.shock_nu) {
    const auto [target, delta] = split_shock(text, "--shock-nu");
    const std::size_t k = find_type(labels, target, "type");
    const double updated = file.populations[k] + delta;
    if (!(updated >= 0.0)) throw InputError("--shock-nu " + text + " makes the population of '" + labels[k] + "' negative");
    file.populations[k] = updated;
    shocks.push_back({"nu", labels[k], delta});
  }
  for (const auto& text : options.shock_pi) {
    const auto [target, delta] = split_shock(text, "--shock-pi");
    const auto comma = target.find(',');
    if (comma == std::string::npos) throw InputError("--shock-pi expects ROW,COL=DELTA, got '" + text + "'");
    const std::size_t i = find_type(file.male_types, target.substr(0, comma), "male type");
    const std::size_t j = find_type(file.female_types, target.substr(comma + 1), "female type");
    const double updated = file.gains[i][j] + delta;
    if (file.mode == GainsMode::Gains && !(updated >= 0.0)) {
      throw InputError("--shock-pi " + text + " makes a gains entry negative");
    }
    file.gains[i][j] = updated;
    shocks.push_back({"pi", file.male_types[i] + "," + file.female_types[j], delta});
  }
  if (shocks.empty()) throw InputError("whatif needs at least one --shock-nu or --shock-pi");
  return shocks;
}

Grid subtract(const Grid& a, const Grid& b) {
  Grid out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] = a[i][j] - b[i][j];
  }
  return out;
}

Row subtract(const Row& a, const Row& b) {
  Row out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

SimulationBlock simulation_block(const Equilibrium& eq, std::uint64_t samples, std::uint64_t seed) {
  UniformSource source(seed);
  const ConsistencyReport report = equilibrium_consistency(eq, samples, source);
  SimulationBlock block;
  block.seed = seed;
  block.samples = samples;
  block.max_deviation = report.max_deviation;
  for (const auto& t : report.types) {
    SimulationType type;
    type.type = t.label;
    type.male = t.male;
    const auto& partners = t.male ? eq.market.gains.col_labels() : eq.market.gains.row_labels();
    for (const std::size_t a : t.alternatives) type.alternatives.push_back(a == 0 ? "single" : partners[a - 1]);
    type.target = to_row(t.target);
    type.frequencies = to_row(t.simulation.frequencies);
    type.counts = t.simulation.counts;
    type.max_deviation = t.max_deviation;
    type.sample_mean = t.simulation.sample_mean;
    type.sample_variance = t.simulation.sample_variance;
    block.types.push_back(std::move(type));
  }
  return block;
}

CheckBlock check_block(const Equilibrium& eq, const StaticsReport& report, const EquilibriumBlock& eq_block,
                       const SolverOptions& options) {
  CheckBlock block;
  const auto add = [&](std::string name, bool passed, double value, double threshold, std::string detail) {
    block.items.push_back({std::move(name), passed, value, threshold, std::move(detail)});
  };
  const std::size_t I = eq.market.num_men_types();
  const std::size_t J = eq.market.num_women_types();

  const ClearingBlock& c = eq_block.clearing;
  const double clearing = std::max({c.row_error, c.column_error, c.identity_error});
  add("market-clearing", c.passed, clearing, kClearingTolerance, "largest scaled row, column or identity error");

  const Matrix& r = report.r_matrix;
  const double asym = (r - r.transpose()).cwiseAbs().maxCoeff() / std::max(1e-300, r.cwiseAbs().maxCoeff());
  add("r-symmetry", asym <= kSymmetryTolerance, asym, kSymmetryTolerance, "max |R - R^T| / max |R|");

  std::size_t sign_failures = 0;
  std::size_t cs_failures = 0;
  for (const auto& f : report.sign_check.failures) (f.rule == "cauchy-schwarz" ? cs_failures : sign_failures)++;
  const std::string mode = report.sign_check.mode == SignMode::Strict ? "strict" : "boundary";
  add("sign-pattern", sign_failures == 0, static_cast<double>(sign_failures), 0.0,
      mode + " comparisons: cross-sex negative, same-sex lower bound");
  add("cauchy-schwarz", cs_failures == 0, static_cast<double>(cs_failures), 0.0, mode + " r_kl^2 < r_kk r_ll");

  if (eq.market.nondegenerate()) {
    add("spectral-bound", report.spectral_pass, report.spectral_radius, 1.0, "Perron root of A(1) below one");
  } else {
    add("spectral-bound", true, report.spectral_radius, 1.0, "not applicable: a row or column of Pi vanishes");
  }

  if ((eq.market.gains.entries().array() > 0.0).all()) {
    const TransferReport transfers = transfer_analysis(eq, report);
    const auto participation = participation_analysis(eq, report);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) worst = std::min(worst, transfers.transfer_derivatives(i, j, i));
    }
    for (const auto& p : participation) worst = std::min(worst, p.derivative);
    add("statics-signs", worst > 0.0, worst, 0.0, "min of d tau_ij / d nu_i and d s_k / d nu_k");
  } else {
    add("statics-signs", true, 0.0, 0.0, "not applicable: Pi has zero entries");
  }

  const FiniteDifferenceReport fd = finite_difference_check(eq.market, kFiniteDifferenceStep, options);
  std::ostringstream detail;
  detail << fd.resolves << " re-solves; r " << fd.r_matrix << ", d_beta " << fd.d_beta << ", gains "
         << fd.gains_sensitivity << ", elasticity " << fd.marriage_elasticity << ", transfers "
         << fd.transfer_derivatives << ", participation " << fd.participation;
  add("finite-difference", fd.worst() <= kFiniteDifferenceTolerance, fd.worst(), kFiniteDifferenceTolerance,
      detail.str());

  block.passed = std::all_of(block.items.begin(), block.items.end(), [](const CheckItem& item) { return item.passed; });
  return block;
}

EstimateBlock estimate_block(const std::vector<std::string>& men, const std::vector<std::string>& women,
                             const Grid& married, const Row& single_men, const Row& single_women) {
  if (married.size() != men.size() || single_men.size() != men.size() || single_women.size() != women.size()) {
    throw InputError("distribution dimensions do not match the type labels");
  }
  EstimateBlock block;
  block.male_types = men;
  block.female_types = women;
  for (std::size_t i = 0; i < men.size(); ++i) {
    if (married[i].size() != women.size()) throw InputError("distribution dimensions do not match the type labels");
    OptRow log_row;
    OptRow row;
    for (std::size_t j = 0; j < women.size(); ++j) {
      const double m = married[i][j];
      const double a = single_men[i];
      const double b = single_women[j];
      if (!(m >= 0.0) || !(a >= 0.0) || !(b >= 0.0) || !std::isfinite(m + a + b)) {
        throw InputError("distribution counts must be finite and non-negative");
      }
      if (m > 0.0 && (a == 0.0 || b == 0.0)) {
        throw InputError("marriages between '" + men[i] + "' and '" + women[j] +
                         "' are observed but one side has no singles; gains are not identified");
      }
      if (a == 0.0 || b == 0.0) {
        log_row.push_back(std::nullopt);
        row.push_back(std::nullopt);
      } else if (m == 0.0) {
        log_row.push_back(std::nullopt);
        row.push_back(0.0);
      } else {
        // Logs are taken before combining so extreme counts neither overflow nor lose digits.
        const double log_gain = std::log(m) - 0.5 * std::log(a) - 0.5 * std::log(b);
        const double product = a * b;
        log_row.push_back(log_gain);
        row.push_back(std::isnormal(product) ? m / std::sqrt(product) : std::exp(log_gain));
      }
    }
    block.log_gains.push_back(std::move(log_row));
    block.gains.push_back(std::move(row));
  }
  return block;
}

EstimateBlock estimate_from_input(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const ReportFile report = parse_report(text);
    if (!report.equilibrium) throw InputError("report '" + path + "' has no equilibrium block");
    const auto& e = *report.equilibrium;
    return estimate_block(e.male_types, e.female_types, e.married, e.single_men, e.single_women);
  }
  const DistributionFile d = parse_distribution_text(text, path);
  return estimate_block(d.male_types, d.female_types, d.married, d.single_men, d.single_women);
}

MarketFile load_market(const CommandOptions& options) {
  if (options.input.empty()) throw InputError("--input is required");
  if (options.population) {
    return parse_market_csv(options.input, *options.population, options.gains_mode.value_or(GainsMode::Gains));
  }
  return parse_market(options.input, options.gains_mode);
}

Echo echo_of(const MarketFile& file, const CommandOptions& options) {
  Echo echo;
  echo.source = options.input + (options.population ? " + " + *options.population : "");
  echo.format_version = file.format_version;
  echo.male_types = file.male_types;
  echo.female_types = file.female_types;
  echo.gains_mode = to_string(file.mode);
  echo.gains = file.gains;
  echo.population = file.populations;
  echo.c = file.c_matrix;
  return echo;
}

void run(const CommandOptions& options, CommandResult& result) {
  ReportFile& report = result.report;
  const std::string& name = options.command;
  if (std::find(subcommand_names().begin(), subcommand_names().end(), name) == subcommand_names().end()) {
    throw InputError("unknown subcommand '" + name + "'");
  }

  if (name == "estimate-gains") {
    if (options.input.empty()) throw InputError("--input is required");
    report.estimate = estimate_from_input(options.input);
    return;
  }

  const SolverOptions solver = solver_options(options);
  MarketFile file = load_market(options);
  report.echo = echo_of(file, options);
  Solved solved = solve_market(file, solver, &report.notes);
  report.equilibrium = solved.block;
  const Equilibrium& eq = solved.eq;

  if (name == "solve") return;

  if (name == "statics" || name == "check") {
    const StaticsReport statics = statics_matrix(eq);
    report.statics = statics_block(eq, statics);
    if (name == "check") {
      report.settings.fd_step = kFiniteDifferenceStep;
      report.settings.clearing_tolerance = kClearingTolerance;
      report.check = check_block(eq, statics, solved.block, solver);
      if (!report.check->passed) {
        report.status = "check-failed";
        result.exit_code = kExitCheck;
      }
    }
    return;
  }

  if (name == "transfers") {
    const StaticsReport statics = statics_matrix(eq);
    report.transfers = transfer_block(eq, transfer_analysis(eq, statics, reduced_c(file, solved.reduced)));
    if (!file.c_matrix) report.notes.push_back("no [c] section: tau is not identified, only the transfer index");
    return;
  }

  if (name == "whatif") {
    MarketFile shocked_file = file;
    WhatifBlock block;
    block.shocks = apply_shocks(shocked_file, options);
    const Solved shocked = solve_market(shocked_file, solver, nullptr);
    block.baseline = solved.block;
    block.shocked = shocked.block;
    block.delta.married = subtract(shocked.block.married, solved.block.married);
    block.delta.single_men = subtract(shocked.block.single_men, solved.block.single_men);
    block.delta.single_women = subtract(shocked.block.single_women, solved.block.single_women);
    report.whatif = std::move(block);
    return;
  }

  if (name == "simulate") {
    if (options.samples == 0) throw InputError("--samples must be positive");
    report.settings.seed = options.seed;
    report.settings.samples = options.samples;
    report.simulation = simulation_block(eq, options.samples, options.seed);
    return;
  }
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"solve",    "statics", "transfers",     "whatif",
                                              "simulate", "check",   "estimate-gains"};
  return names;
}

CommandResult run_subcommand(const CommandOptions& options) {
  CommandResult result;
  ReportFile& report = result.report;
  report.command = options.command;
  report.settings.tolerance = options.tolerance;
  report.settings.max_iterations = options.max_iterations;

  auto fail = [&](int code, std::string kind, const std::string& message) {
    result.exit_code = code;
    report.status = "error";
    report.error = ErrorBlock{std::move(kind), message, std::nullopt, std::nullopt};
  };

  try {
    run(options, result);
  } catch (const ParseError& e) {
    fail(kExitInput, "input", e.what());
    if (e.line() > 0) report.error->line = e.line();
    if (e.column() > 0) report.error->column = e.column();
  } catch (const InputError& e) {
    fail(kExitInput, "input", e.what());
  } catch (const ScalingError& e) {
    fail(kExitInput, "scaling", e.what());
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << e.what() << " (residual " << e.residual_norm() << " after " << e.iterations() << " iterations)";
    fail(kExitSolver, "solver", msg.str());
  } catch (const StaticsError& e) {
    fail(kExitSolver, "statics", e.what());
  }
  report.exit_code = result.exit_code;
  return result;
}

namespace {

std::string fmt(double v, int precision = 10) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

void table(std::ostringstream& out, const std::string& corner, const std::vector<std::string>& rows,
           const std::vector<std::string>& cols, const std::vector<std::vector<std::string>>& cells) {
  std::size_t width = corner.size();
  for (const auto& r : rows) width = std::max(width, r.size());
  for (const auto& c : cols) width = std::max(width, c.size());
  for (const auto& row : cells) {
    for (const auto& cell : row) width = std::max(width, cell.size());
  }
  width += 2;
  out << std::left << std::setw(static_cast<int>(width)) << corner;
  for (const auto& c : cols) out << std::right << std::setw(static_cast<int>(width)) << c;
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << rows[i];
    for (const auto& cell : cells[i]) out << std::right << std::setw(static_cast<int>(width)) << cell;
    out << "\n";
  }
}

void equilibrium_table(std::ostringstream& out, const EquilibriumBlock& e) {
  std::vector<std::string> cols = e.female_types;
  cols.push_back("single");
  std::vector<std::vector<std::string>> cells;
  for (std::size_t i = 0; i < e.male_types.size(); ++i) {
    std::vector<std::string> row;
    for (double v : e.married[i]) row.push_back(fmt(v));
    row.push_back(fmt(e.single_men[i]));
    cells.push_back(std::move(row));
  }
  std::vector<std::string> rows = e.male_types;
  rows.push_back("single");
  std::vector<std::string> last;
  for (double v : e.single_women) last.push_back(fmt(v));
  last.push_back("");
  cells.push_back(std::move(last));
  table(out, "mu", rows, cols, cells);
  out << "iterations " << e.iterations << ", residual " << fmt(e.residual_norm, 3) << ", clearing "
      << (e.clearing.passed ? "ok" : "FAILED") << "\n";
}

}  // namespace

std::string summary_table(const ReportFile& report) {
  std::ostringstream out;
  out << report.command << ": " << report.status << " (exit " << report.exit_code << ")\n";
  for (const auto& note : report.notes) out << "note: " << note << "\n";
  if (report.error) out << "error: " << report.error->message << "\n";
  if (report.equilibrium && !report.whatif) equilibrium_table(out, *report.equilibrium);
  if (report.statics) {
    const auto& s = *report.statics;
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : s.r_matrix) {
      std::vector<std::string> line;
      for (double v : row) line.push_back(fmt(v, 6));
      cells.push_back(std::move(line));
    }
    table(out, "R", s.types, s.types, cells);
    out << "sign check (" << s.sign_check.mode << "): " << (s.sign_check.passed ? "pass" : "FAIL") << ", lambda_max "
        << fmt(s.spectral.lambda_max) << "\n";
  }
  if (report.transfers) {
    const auto& t = *report.transfers;
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : t.tau ? *t.tau : t.transfer_index) {
      std::vector<std::string> line;
      for (double v : row) line.push_back(fmt(v, 6));
      cells.push_back(std::move(line));
    }
    table(out, t.tau ? "tau" : "2tau+c", t.male_types, t.female_types, cells);
  }
  if (report.whatif) {
    out << "baseline\n";
    equilibrium_table(out, report.whatif->baseline);
    out << "shocked\n";
    equilibrium_table(out, report.whatif->shocked);
  }
  if (report.simulation) {
    out << "simulated " << report.simulation->samples << " agents per type (seed " << report.simulation->seed
        << "), max deviation " << fmt(report.simulation->max_deviation, 4) << "\n";
  }
  if (report.check) {
    for (const auto& item : report.check->items) {
      out << (item.passed ? "PASS " : "FAIL ") << item.name << "  value " << fmt(item.value, 4) << "  ("
          << item.detail << ")\n";
    }
  }
  if (report.estimate) {
    const auto& e = *report.estimate;
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : e.log_gains) {
      std::vector<std::string> line;
      for (const auto& v : row) line.push_back(v ? fmt(*v) : "-inf");
      cells.push_back(std::move(line));
    }
    table(out, "pi", e.male_types, e.female_types, cells);
  }
  return out.str();
}

}  // namespace choosiow::cli
