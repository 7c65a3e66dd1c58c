#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "choosiow/cli/commands.hpp"

using namespace choosiow::cli;

namespace {

const std::map<std::string, std::string> kDescriptions{
    {"solve", "equilibrium amplitudes and marriage distribution"},
    {"statics", "substitution matrix, sensitivities and sign diagnostics"},
    {"transfers", "transfer and participation derivatives"},
    {"whatif", "re-solve after population or gains shocks"},
    {"simulate", "Monte Carlo choices against the logit predictions"},
    {"check", "run every consistency check and fail on any violation"},
    {"estimate-gains", "recover gains from an observed distribution"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Choo-Siow marriage market solver"};
  app.require_subcommand(1, 1);

  CommandOptions options;
  std::string gains_mode;

  for (const auto& name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--input,-i", options.input, "market file, gains CSV, or (estimate-gains) report/distribution")
        ->required();
    sub->add_option("--output,-o", options.output, "write the JSON report here and print tables to stdout");
    if (name == "estimate-gains") continue;
    sub->add_option("--population", options.population, "population CSV when --input is a gains CSV");
    sub->add_option("--tolerance", options.tolerance, "relative gradient tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", options.max_iterations, "Newton iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--gains-mode", gains_mode, "interpret gains as pi (log) or Pi")
        ->check(CLI::IsMember({"pi", "Pi"}));
    if (name == "simulate") {
      sub->add_option("--seed", options.seed, "random seed");
      sub->add_option("--samples", options.samples, "agents simulated per type")->check(CLI::PositiveNumber);
    }
    if (name == "whatif") {
      sub->add_option("--shock-nu", options.shock_nu, "LABEL=DELTA added to a population count")->take_all();
      sub->add_option("--shock-pi", options.shock_pi, "ROW,COL=DELTA added to a gains entry")->take_all();
    }
  }

  CLI11_PARSE(app, argc, argv);
  options.command = app.get_subcommands().front()->get_name();
  if (!gains_mode.empty()) options.gains_mode = parse_gains_mode(gains_mode);

  const CommandResult result = run_subcommand(options);
  const std::string json = serialize_report(result.report);
  if (options.output) {
    std::ofstream out(*options.output, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write '" << *options.output << "'\n";
      return kExitInput;
    }
    out << json;
    std::cout << summary_table(result.report);
  } else {
    std::cout << json;
  }
  if (result.report.error && !options.output) std::cerr << "error: " << result.report.error->message << "\n";
  return result.exit_code;
}
