#include "choosiow/cli/market_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace choosiow::cli {

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
    : InputError([&] {
        std::ostringstream out;
        out << source;
        if (line > 0) out << ":" << line;
        if (column > 0) out << ":" << column;
        out << ": " << message;
        return out.str();
      }()),
      line_(line),
      column_(column),
      message_(message) {}

GainsMode parse_gains_mode(const std::string& tag) {
  if (tag == "pi") return GainsMode::LogGains;
  if (tag == "Pi") return GainsMode::Gains;
  throw InputError("unknown gains mode '" + tag + "' (expected pi or Pi)");
}

std::string to_string(GainsMode mode) { return mode == GainsMode::LogGains ? "pi" : "Pi"; }

namespace {

Matrix to_matrix(const Grid& grid, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = grid[i][j];
  }
  return m;
}

}  // namespace

Matrix MarketFile::gains_matrix() const {
  Matrix m = to_matrix(gains, female_types.size());
  if (mode == GainsMode::LogGains) m = m.array().exp().matrix();
  return m;
}

Vector MarketFile::population_vector() const {
  return Eigen::Map<const Vector>(populations.data(), static_cast<Eigen::Index>(populations.size()));
}

std::optional<Matrix> MarketFile::c() const {
  if (!c_matrix) return std::nullopt;
  return to_matrix(*c_matrix, female_types.size());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

struct Token {
  std::string text;
  std::size_t column = 0;
};

std::vector<Token> tokenize(const std::string& line, char separator = ' ') {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  const std::size_t end = line.find('#') == std::string::npos ? line.size() : line.find('#');
  auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; };
  if (separator == ' ') {
    while (pos < end) {
      while (pos < end && is_space(line[pos])) ++pos;
      if (pos >= end) break;
      const std::size_t start = pos;
      while (pos < end && !is_space(line[pos])) ++pos;
      tokens.push_back({line.substr(start, pos - start), start + 1});
    }
    return tokens;
  }
  // Separated fields, whitespace trimmed; empty fields are kept.
  while (true) {
    const std::size_t stop = std::min(line.find(separator, pos), end);
    std::size_t a = pos;
    std::size_t b = stop;
    while (a < b && is_space(line[a])) ++a;
    while (b > a && is_space(line[b - 1])) --b;
    tokens.push_back({line.substr(a, b - a), a + 1});
    if (stop >= end) break;
    pos = stop + 1;
  }
  return tokens;
}

std::optional<double> to_number(std::string text) {
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

struct Line {
  std::size_t number = 0;
  std::string text;
};

struct Section {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::size_t line = 0;
  std::vector<Line> body;
};

struct Document {
  std::vector<std::pair<Line, std::vector<Token>>> preamble;
  std::vector<Section> sections;
};

Document split_sections(const std::string& text, const std::string& source, const std::set<std::string>& known) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++number;
    if (number == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    const auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    if (tokens.front().text.front() == '[') {
      const std::size_t open = tokens.front().column - 1;
      const std::size_t close = raw.find(']', open);
      const std::size_t comment = raw.find('#');
      if (close == std::string::npos || (comment != std::string::npos && close > comment)) {
        throw ParseError(source, number, open + 1, "section header is missing ']'");
      }
      const auto trailing = tokenize(raw.substr(close + 1));
      if (!trailing.empty()) {
        throw ParseError(source, number, close + 1 + trailing.front().column, "unexpected text after section header");
      }
      const auto parts = tokenize(raw.substr(open + 1, close - open - 1));
      if (parts.empty()) throw ParseError(source, number, open + 1, "empty section header");
      Section section;
      section.name = parts.front().text;
      section.line = number;
      if (!known.count(section.name)) {
        throw ParseError(source, number, open + 1 + parts.front().column, "unknown section [" + section.name + "]");
      }
      if (!seen.insert(section.name).second) {
        throw ParseError(source, number, open + 1, "duplicate section [" + section.name + "]");
      }
      for (std::size_t p = 1; p < parts.size(); ++p) {
        const auto eq = parts[p].text.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw ParseError(source, number, open + 1 + parts[p].column, "expected key=value in section header");
        }
        section.attributes[parts[p].text.substr(0, eq)] = parts[p].text.substr(eq + 1);
      }
      doc.sections.push_back(std::move(section));
      continue;
    }
    if (doc.sections.empty()) {
      doc.preamble.push_back({Line{number, raw}, tokens});
    } else {
      doc.sections.back().body.push_back(Line{number, raw});
    }
  }
  return doc;
}

const Section* find_section(const Document& doc, const std::string& name) {
  for (const auto& s : doc.sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::vector<std::string> read_labels(const Section* section, const std::string& source, const std::string& name,
                                     std::set<std::string>& all_labels) {
  if (section == nullptr) throw ParseError(source, 0, 0, "missing section [" + name + "]");
  std::vector<std::string> labels;
  for (const auto& line : section->body) {
    for (const auto& token : tokenize(line.text)) {
      if (!all_labels.insert(token.text).second) {
        throw ParseError(source, line.number, token.column, "duplicate type label '" + token.text + "'");
      }
      labels.push_back(token.text);
    }
  }
  if (labels.empty()) throw ParseError(source, section->line, 1, "[" + name + "] lists no types");
  return labels;
}

Grid read_matrix(const Section& section, const std::string& source, std::size_t rows, std::size_t cols,
                 const std::string& row_what) {
  Grid grid;
  std::size_t last_line = section.line;
  for (const auto& line : section.body) {
    const auto tokens = tokenize(line.text);
    if (tokens.empty()) continue;
    last_line = line.number;
    if (grid.size() == rows) {
      std::ostringstream msg;
      msg << "[" << section.name << "] has more than " << rows << " rows (one per " << row_what << ")";
      throw ParseError(source, line.number, tokens.front().column, msg.str());
    }
    if (tokens.size() != cols) {
      std::ostringstream msg;
      msg << "[" << section.name << "] row " << grid.size() + 1 << " has " << tokens.size() << " entries, expected "
          << cols << " (one per female type)";
      throw ParseError(source, line.number, tokens.front().column, msg.str());
    }
    std::vector<double> row;
    for (const auto& token : tokens) {
      const auto value = to_number(token.text);
      if (!value) throw ParseError(source, line.number, token.column, "'" + token.text + "' is not a number");
      row.push_back(*value);
    }
    grid.push_back(std::move(row));
  }
  if (grid.size() != rows) {
    std::ostringstream msg;
    msg << "[" << section.name << "] has " << grid.size() << " rows, expected " << rows << " (one per " << row_what
        << ")";
    throw ParseError(source, last_line, 0, msg.str());
  }
  return grid;
}

/// Locates entry (r, c) of a matrix section for error messages.
std::pair<std::size_t, std::size_t> locate(const Section& section, std::size_t r, std::size_t c) {
  std::size_t row = 0;
  for (const auto& line : section.body) {
    const auto tokens = tokenize(line.text);
    if (tokens.empty()) continue;
    if (row == r) return {line.number, tokens[c].column};
    ++row;
  }
  return {section.line, 0};
}

void check_gains(const Grid& gains, GainsMode mode, const Section& section, const std::string& source) {
  for (std::size_t i = 0; i < gains.size(); ++i) {
    for (std::size_t j = 0; j < gains[i].size(); ++j) {
      const double v = gains[i][j];
      const bool bad = mode == GainsMode::Gains ? (!std::isfinite(v) || v < 0.0)
                                                : (std::isnan(v) || v == std::numeric_limits<double>::infinity());
      if (bad) {
        const auto [line, column] = locate(section, i, j);
        throw ParseError(source, line, column,
                         mode == GainsMode::Gains ? "gains entry must be finite and non-negative"
                                                  : "log-gains entry must be a real number or -inf");
      }
    }
  }
}

std::vector<double> read_label_values(const Section* section, const std::string& source, const std::string& name,
                                      const std::vector<std::string>& order) {
  if (section == nullptr) throw ParseError(source, 0, 0, "missing section [" + name + "]");
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < order.size(); ++k) index[order[k]] = k;
  std::vector<std::optional<double>> values(order.size());
  for (const auto& line : section->body) {
    const auto tokens = tokenize(line.text);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError(source, line.number, tokens.front().column, "expected 'label value' in [" + name + "]");
    }
    const auto it = index.find(tokens[0].text);
    if (it == index.end()) {
      throw ParseError(source, line.number, tokens[0].column, "unknown type label '" + tokens[0].text + "'");
    }
    if (values[it->second]) {
      throw ParseError(source, line.number, tokens[0].column, "type '" + tokens[0].text + "' listed twice");
    }
    const auto value = to_number(tokens[1].text);
    if (!value) throw ParseError(source, line.number, tokens[1].column, "'" + tokens[1].text + "' is not a number");
    if (!std::isfinite(*value) || *value < 0.0) {
      throw ParseError(source, line.number, tokens[1].column, "value must be finite and non-negative");
    }
    values[it->second] = *value;
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!values[k]) throw ParseError(source, section->line, 0, "[" + name + "] has no entry for '" + order[k] + "'");
    out.push_back(*values[k]);
  }
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

MarketFile parse_market_text(const std::string& text, const std::string& source,
                             std::optional<GainsMode> mode_override) {
  const Document doc = split_sections(text, source, {"types.male", "types.female", "gains", "population", "c"});
  MarketFile market;

  for (const auto& [line, tokens] : doc.preamble) {
    std::string joined;
    for (const auto& t : tokens) joined += t.text;
    const auto eq = joined.find('=');
    if (eq == std::string::npos || joined.substr(0, eq) != "format_version") {
      throw ParseError(source, line.number, tokens.front().column, "expected 'format_version = 1' before sections");
    }
    market.format_version = joined.substr(eq + 1);
    if (market.format_version != "1") {
      throw ParseError(source, line.number, tokens.back().column,
                       "unsupported format_version '" + market.format_version + "'");
    }
  }

  std::set<std::string> labels;
  market.male_types = read_labels(find_section(doc, "types.male"), source, "types.male", labels);
  market.female_types = read_labels(find_section(doc, "types.female"), source, "types.female", labels);

  const Section* gains = find_section(doc, "gains");
  if (gains == nullptr) throw ParseError(source, 0, 0, "missing section [gains]");
  const auto tag = gains->attributes.find("mode");
  for (const auto& [key, value] : gains->attributes) {
    if (key != "mode") throw ParseError(source, gains->line, 1, "unknown [gains] attribute '" + key + "'");
  }
  if (mode_override) {
    market.mode = *mode_override;
  } else if (tag == gains->attributes.end()) {
    throw ParseError(source, gains->line, 1, "[gains] needs a mode tag (mode=pi or mode=Pi)");
  } else if (tag->second == "pi" || tag->second == "Pi") {
    market.mode = parse_gains_mode(tag->second);
  } else {
    throw ParseError(source, gains->line, 1, "unknown gains mode '" + tag->second + "' (expected pi or Pi)");
  }
  market.gains = read_matrix(*gains, source, market.male_types.size(), market.female_types.size(), "male type");
  check_gains(market.gains, market.mode, *gains, source);

  market.populations = read_label_values(find_section(doc, "population"), source, "population",
                                         concat(market.male_types, market.female_types));

  if (const Section* c = find_section(doc, "c")) {
    Grid grid = read_matrix(*c, source, market.male_types.size(), market.female_types.size(), "male type");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        if (!std::isfinite(grid[i][j])) {
          const auto [line, column] = locate(*c, i, j);
          throw ParseError(source, line, column, "c entry must be finite");
        }
      }
    }
    market.c_matrix = std::move(grid);
  }
  return market;
}

MarketFile parse_market(const std::string& path, std::optional<GainsMode> mode_override) {
  return parse_market_text(read_file(path), path, mode_override);
}

namespace {

std::vector<std::pair<std::size_t, std::vector<Token>>> csv_rows(const std::string& text) {
  std::vector<std::pair<std::size_t, std::vector<Token>>> rows;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (number == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    if (tokenize(raw).empty()) continue;
    rows.emplace_back(number, tokenize(raw, ','));
  }
  return rows;
}

}  // namespace

MarketFile parse_market_csv(const std::string& gains_path, const std::string& population_path, GainsMode mode) {
  MarketFile market;
  market.mode = mode;
  std::set<std::string> labels;
  auto add_label = [&](const std::string& path, std::size_t line, const Token& token, std::vector<std::string>& out) {
    if (token.text.empty()) throw ParseError(path, line, token.column, "empty type label");
    if (!labels.insert(token.text).second) {
      throw ParseError(path, line, token.column, "duplicate type label '" + token.text + "'");
    }
    out.push_back(token.text);
  };

  const auto rows = csv_rows(read_file(gains_path));
  if (rows.empty()) throw ParseError(gains_path, 0, 0, "gains table is empty");
  const auto& header = rows.front();
  for (std::size_t c = 1; c < header.second.size(); ++c) add_label(gains_path, header.first, header.second[c], market.female_types);
  if (market.female_types.empty()) throw ParseError(gains_path, header.first, 1, "header row lists no female types");

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, fields] = rows[r];
    add_label(gains_path, line, fields.front(), market.male_types);
    if (fields.size() != market.female_types.size() + 1) {
      std::ostringstream msg;
      msg << "row '" << fields.front().text << "' has " << fields.size() - 1 << " entries, expected "
          << market.female_types.size();
      throw ParseError(gains_path, line, fields.front().column, msg.str());
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto value = to_number(fields[c].text);
      if (!value) throw ParseError(gains_path, line, fields[c].column, "'" + fields[c].text + "' is not a number");
      const bool bad = mode == GainsMode::Gains ? (!std::isfinite(*value) || *value < 0.0)
                                                : (std::isnan(*value) || *value == std::numeric_limits<double>::infinity());
      if (bad) throw ParseError(gains_path, line, fields[c].column, "invalid gains entry");
      row.push_back(*value);
    }
    market.gains.push_back(std::move(row));
  }
  if (market.male_types.empty()) throw ParseError(gains_path, header.first, 1, "gains table has no male rows");

  const auto all = concat(market.male_types, market.female_types);
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < all.size(); ++k) index[all[k]] = k;
  std::vector<std::optional<double>> values(all.size());
  const auto pop_rows = csv_rows(read_file(population_path));
  for (std::size_t r = 0; r < pop_rows.size(); ++r) {
    const auto& [line, fields] = pop_rows[r];
    if (fields.size() != 2) throw ParseError(population_path, line, 1, "expected 'label,population'");
    const auto value = to_number(fields[1].text);
    if (!value && r == 0) continue;  // header row
    if (!value) throw ParseError(population_path, line, fields[1].column, "'" + fields[1].text + "' is not a number");
    const auto it = index.find(fields[0].text);
    if (it == index.end()) {
      throw ParseError(population_path, line, fields[0].column, "unknown type label '" + fields[0].text + "'");
    }
    if (values[it->second]) {
      throw ParseError(population_path, line, fields[0].column, "type '" + fields[0].text + "' listed twice");
    }
    if (!std::isfinite(*value) || *value < 0.0) {
      throw ParseError(population_path, line, fields[1].column, "population must be finite and non-negative");
    }
    values[it->second] = *value;
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!values[k]) throw ParseError(population_path, 0, 0, "no population for type '" + all[k] + "'");
    market.populations.push_back(*values[k]);
  }
  return market;
}

std::string format_market(const MarketFile& market) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto write_labels = [&](const std::vector<std::string>& labels) {
    for (std::size_t k = 0; k < labels.size(); ++k) out << (k ? " " : "") << labels[k];
    out << "\n";
  };
  auto write_grid = [&](const Grid& grid) {
    for (const auto& row : grid) {
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
      out << "\n";
    }
  };
  out << "format_version = " << market.format_version << "\n\n[types.male]\n";
  write_labels(market.male_types);
  out << "\n[types.female]\n";
  write_labels(market.female_types);
  out << "\n[gains mode=" << to_string(market.mode) << "]\n";
  write_grid(market.gains);
  out << "\n[population]\n";
  const auto all = concat(market.male_types, market.female_types);
  for (std::size_t k = 0; k < all.size(); ++k) out << all[k] << " " << market.populations[k] << "\n";
  if (market.c_matrix) {
    out << "\n[c]\n";
    write_grid(*market.c_matrix);
  }
  return out.str();
}

DistributionFile parse_distribution_text(const std::string& text, const std::string& source) {
  const Document doc = split_sections(text, source, {"types.male", "types.female", "married", "singles"});
  if (!doc.preamble.empty()) {
    throw ParseError(source, doc.preamble.front().first.number, 1, "unexpected text before the first section");
  }
  DistributionFile out;
  std::set<std::string> labels;
  out.male_types = read_labels(find_section(doc, "types.male"), source, "types.male", labels);
  out.female_types = read_labels(find_section(doc, "types.female"), source, "types.female", labels);
  const Section* married = find_section(doc, "married");
  if (married == nullptr) throw ParseError(source, 0, 0, "missing section [married]");
  out.married = read_matrix(*married, source, out.male_types.size(), out.female_types.size(), "male type");
  for (std::size_t i = 0; i < out.married.size(); ++i) {
    for (std::size_t j = 0; j < out.married[i].size(); ++j) {
      if (!std::isfinite(out.married[i][j]) || out.married[i][j] < 0.0) {
        const auto [line, column] = locate(*married, i, j);
        throw ParseError(source, line, column, "marriage counts must be finite and non-negative");
      }
    }
  }
  const auto singles = read_label_values(find_section(doc, "singles"), source, "singles",
                                         concat(out.male_types, out.female_types));
  out.single_men.assign(singles.begin(), singles.begin() + static_cast<std::ptrdiff_t>(out.male_types.size()));
  out.single_women.assign(singles.begin() + static_cast<std::ptrdiff_t>(out.male_types.size()), singles.end());
  return out;
}

}  // namespace choosiow::cli
