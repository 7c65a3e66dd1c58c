#ifndef CHOOSIOW_CLI_REPORT_HPP
#define CHOOSIOW_CLI_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

// nlohmann 3.11 has no std::optional support: absent values are written as null.
namespace nlohmann {
template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& value) {
    if (value) {
      j = *value;
    } else {
      j = nullptr;
    }
  }
  static void from_json(const json& j, std::optional<T>& value) {
    if (j.is_null()) {
      value.reset();
    } else {
      value = j.get<T>();
    }
  }
};
}  // namespace nlohmann

namespace choosiow::cli {

using Row = std::vector<double>;
using Grid = std::vector<Row>;
using OptRow = std::vector<std::optional<double>>;
using OptGrid = std::vector<OptRow>;
using Cube = std::vector<Grid>;        // [i][j][k]
using OptCube = std::vector<OptGrid>;  // [i][j][k]

inline constexpr int kReportFormatVersion = 1;

struct Settings {
  double tolerance = 1e-10;
  int max_iterations = 200;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<double> fd_step;
  std::optional<double> clearing_tolerance;
  bool operator==(const Settings&) const = default;
};

struct Echo {
  std::string source;
  std::string format_version;
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  std::string gains_mode;
  Grid gains;  // as given, in gains_mode
  Row population;
  std::optional<Grid> c;
  bool operator==(const Echo&) const = default;
};

struct ClearingBlock {
  double row_error = 0.0;
  double column_error = 0.0;
  double identity_error = 0.0;
  bool passed = false;
  bool operator==(const ClearingBlock&) const = default;
};

struct EquilibriumBlock {
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  OptRow beta;  // absent for unpopulated types
  Grid married;
  Row single_men;
  Row single_women;
  double residual_norm = 0.0;
  int iterations = 0;
  double objective = 0.0;
  ClearingBlock clearing;
  std::vector<std::string> dropped_types;
  bool operator==(const EquilibriumBlock&) const = default;
};

struct SignFailureEntry {
  std::string rule;
  std::string k;
  std::string l;
  double value = 0.0;
  double bound = 0.0;
  bool operator==(const SignFailureEntry&) const = default;
};

struct SignBlock {
  std::string mode;
  bool passed = false;
  std::uint64_t comparisons = 0;
  std::vector<SignFailureEntry> failures;
  bool operator==(const SignBlock&) const = default;
};

struct SpectralBlock {
  double lambda_max = 0.0;
  bool pass = false;
  bool applicable = false;  // false when a row or column of Pi vanishes
  bool operator==(const SpectralBlock&) const = default;
};

struct ParticipationEntry {
  std::string type;
  double nonparticipation = 0.0;
  double derivative = 0.0;
  bool boundary = false;
  bool operator==(const ParticipationEntry&) const = default;
};

struct ConjectureEntry {
  std::string male;
  std::string female;
  double male_sum = 0.0;
  double female_sum = 0.0;
  bool male_positive = false;
  bool female_positive = false;
  bool operator==(const ConjectureEntry&) const = default;
};

/// Derivatives are indexed by the populated types listed in `types`.
struct StaticsBlock {
  std::vector<std::string> types;
  Grid r_matrix;
  Grid d_beta_d_nu;
  Cube d_beta_d_gains;
  OptCube d_log_beta_d_gains;
  OptCube marriage_elasticity;
  std::vector<ParticipationEntry> participation;
  SpectralBlock spectral;
  SignBlock sign_check;
  std::vector<ConjectureEntry> conjecture_probe;
  bool operator==(const StaticsBlock&) const = default;
};

struct TransferBlock {
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  std::vector<std::string> types;
  Grid transfer_index;
  Cube derivatives;  // d tau_ij / d nu_k
  std::optional<Grid> tau;
  bool operator==(const TransferBlock&) const = default;
};

struct SimulationType {
  std::string type;
  bool male = true;
  std::vector<std::string> alternatives;  // "single" or partner label
  Row target;
  Row frequencies;
  std::vector<std::uint64_t> counts;
  double max_deviation = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  bool operator==(const SimulationType&) const = default;
};

struct SimulationBlock {
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  double max_deviation = 0.0;
  std::vector<SimulationType> types;
  bool operator==(const SimulationBlock&) const = default;
};

struct CheckItem {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
  bool operator==(const CheckItem&) const = default;
};

struct CheckBlock {
  bool passed = false;
  std::vector<CheckItem> items;
  bool operator==(const CheckBlock&) const = default;
};

struct ShockEntry {
  std::string kind;  // "nu" or "pi"
  std::string target;
  double delta = 0.0;
  bool operator==(const ShockEntry&) const = default;
};

struct DeltaBlock {
  Grid married;
  Row single_men;
  Row single_women;
  bool operator==(const DeltaBlock&) const = default;
};

struct WhatifBlock {
  std::vector<ShockEntry> shocks;
  EquilibriumBlock baseline;
  EquilibriumBlock shocked;
  DeltaBlock delta;
  bool operator==(const WhatifBlock&) const = default;
};

struct EstimateBlock {
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  OptGrid log_gains;  // absent where no marriages are observed
  OptGrid gains;
  bool operator==(const EstimateBlock&) const = default;
};

struct ErrorBlock {
  std::string kind;  // "input", "scaling", "solver", "statics"
  std::string message;
  std::optional<std::uint64_t> line;
  std::optional<std::uint64_t> column;
  bool operator==(const ErrorBlock&) const = default;
};

struct ReportFile {
  int format_version = kReportFormatVersion;
  std::string command;
  std::string status = "ok";  // "ok", "error", "check-failed"
  int exit_code = 0;
  Settings settings;
  std::optional<Echo> echo;
  std::vector<std::string> notes;
  std::optional<EquilibriumBlock> equilibrium;
  std::optional<StaticsBlock> statics;
  std::optional<TransferBlock> transfers;
  std::optional<SimulationBlock> simulation;
  std::optional<CheckBlock> check;
  std::optional<WhatifBlock> whatif;
  std::optional<EstimateBlock> estimate;
  std::optional<ErrorBlock> error;
  bool operator==(const ReportFile&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Settings, tolerance, max_iterations, seed, samples, fd_step, clearing_tolerance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Echo, source, format_version, male_types, female_types, gains_mode, gains,
                                   population, c)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClearingBlock, row_error, column_error, identity_error, passed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EquilibriumBlock, male_types, female_types, beta, married, single_men,
                                   single_women, residual_norm, iterations, objective, clearing, dropped_types)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SignFailureEntry, rule, k, l, value, bound)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SignBlock, mode, passed, comparisons, failures)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SpectralBlock, lambda_max, pass, applicable)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ParticipationEntry, type, nonparticipation, derivative, boundary)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ConjectureEntry, male, female, male_sum, female_sum, male_positive,
                                   female_positive)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StaticsBlock, types, r_matrix, d_beta_d_nu, d_beta_d_gains, d_log_beta_d_gains,
                                   marriage_elasticity, participation, spectral, sign_check, conjecture_probe)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TransferBlock, male_types, female_types, types, transfer_index, derivatives, tau)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulationType, type, male, alternatives, target, frequencies, counts,
                                   max_deviation, sample_mean, sample_variance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulationBlock, seed, samples, max_deviation, types)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CheckItem, name, passed, value, threshold, detail)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CheckBlock, passed, items)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ShockEntry, kind, target, delta)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DeltaBlock, married, single_men, single_women)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WhatifBlock, shocks, baseline, shocked, delta)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EstimateBlock, male_types, female_types, log_gains, gains)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ErrorBlock, kind, message, line, column)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReportFile, format_version, command, status, exit_code, settings, echo, notes,
                                   equilibrium, statics, transfers, simulation, check, whatif, estimate, error)

/// Pretty-printed JSON; doubles use the shortest decimal that reads back exactly.
std::string serialize_report(const ReportFile& report);

/// Throws InputError on malformed JSON or an unsupported format_version.
ReportFile parse_report(const std::string& text);

}  // namespace choosiow::cli

#endif  // CHOOSIOW_CLI_REPORT_HPP
