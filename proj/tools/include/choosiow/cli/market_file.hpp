#ifndef CHOOSIOW_CLI_MARKET_FILE_HPP
#define CHOOSIOW_CLI_MARKET_FILE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "choosiow/market.hpp"

namespace choosiow::cli {

using Grid = std::vector<std::vector<double>>;

/// Input error that knows where in the file it happened (1-based; 0 = unknown).
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

enum class GainsMode { LogGains, Gains };  // "pi" and "Pi"

GainsMode parse_gains_mode(const std::string& tag);
std::string to_string(GainsMode mode);

struct MarketFile {
  std::string format_version = "1";
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  GainsMode mode = GainsMode::Gains;
  Grid gains;                       // as written (pi or Pi, per mode)
  std::vector<double> populations;  // male types first, then female types; zero allowed
  std::optional<Grid> c_matrix;

  /// Pi, with log-gains exponentiated.
  Matrix gains_matrix() const;
  Vector population_vector() const;
  std::optional<Matrix> c() const;
};

/// Structured market file. `mode_override` replaces the tag in the file (and
/// makes a missing tag acceptable).
MarketFile parse_market_text(const std::string& text, const std::string& source = "<input>",
                             std::optional<GainsMode> mode_override = std::nullopt);
MarketFile parse_market(const std::string& path, std::optional<GainsMode> mode_override = std::nullopt);

/// Spreadsheet form: a gains table with a header row of female labels and one
/// labelled row per male type, plus a two-column label,population table.
MarketFile parse_market_csv(const std::string& gains_path, const std::string& population_path,
                            GainsMode mode = GainsMode::Gains);

std::string format_market(const MarketFile& market);

/// Observed marital distribution for gains estimation.
struct DistributionFile {
  std::vector<std::string> male_types;
  std::vector<std::string> female_types;
  Grid married;
  std::vector<double> single_men;
  std::vector<double> single_women;
};

/// Sections [types.male], [types.female], [married] (rows), [singles] (label value).
DistributionFile parse_distribution_text(const std::string& text, const std::string& source = "<input>");

std::string read_file(const std::string& path);

}  // namespace choosiow::cli

#endif  // CHOOSIOW_CLI_MARKET_FILE_HPP
