#include "choosiow/cli/report.hpp"

#include "choosiow/market.hpp"

namespace choosiow::cli {

std::string serialize_report(const ReportFile& report) { return nlohmann::json(report).dump(2) + "\n"; }

ReportFile parse_report(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) throw InputError("report has no format_version");
  if (doc.at("format_version") != kReportFormatVersion) {
    throw InputError("unsupported report format_version " + doc.at("format_version").dump());
  }
  try {
    return doc.get<ReportFile>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace choosiow::cli
