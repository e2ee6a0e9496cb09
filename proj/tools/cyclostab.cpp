#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cyclostab/commands.hpp"

int main(int argc, char** argv) {
  using namespace cyclostab;

  CLI::App app{"Robust stability of cyclic feedback interconnections via Mobius-disk indices"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  bool as_json = false;
  bool as_text = false;
  bool no_timing = false;
  double omega_max = 0.0;
  std::string direction;
  auto* analyze = app.add_subcommand("analyze", "Index every subsystem and evaluate the criterion");
  analyze->add_option("config", analyze_args.config_path, "Interconnection config (JSON)")->required();
  auto* json_flag = analyze->add_flag("--json", as_json, "Machine-readable report");
  analyze->add_flag("--text", as_text, "Human-readable report (default)")->excludes(json_flag);
  analyze->add_flag("--no-timing", no_timing, "Omit the timing field from the JSON report");
  analyze->add_option("--omega-max", omega_max, "Nyquist truncation frequency");
  analyze->add_option("--direction", direction, "Index direction")
      ->check(CLI::IsMember({"min", "max", "both"}));

  AdmissibleArgs admissible_args;
  auto* admissible = app.add_subcommand("admissible", "Print the admissible set of gamma_bar");
  admissible->add_option("--a", admissible_args.a)->required();
  admissible->add_option("--b", admissible_args.b)->required();
  admissible->add_option("--c", admissible_args.c)->required();
  admissible->add_option("--d", admissible_args.d)->required();
  admissible->add_option("--n", admissible_args.n, "Number of subsystems")->required();

  NyquistArgs nyquist_args;
  auto* nyquist = app.add_subcommand("nyquist", "Write the Nyquist diagram of one subsystem (SVG + CSV)");
  nyquist->add_option("config", nyquist_args.config_path, "Interconnection config (JSON)")->required();
  nyquist->add_option("--subsystem", nyquist_args.subsystem, "1-based subsystem index")->required();
  nyquist->add_option("--out", nyquist_args.out_prefix, "Output prefix")->required();

  CounterexampleArgs counter_args;
  auto* counter = app.add_subcommand("counterexample", "Build destabilizing subsystems when the criterion fails");
  counter->add_option("--a", counter_args.a)->required();
  counter->add_option("--b", counter_args.b)->required();
  counter->add_option("--c", counter_args.c)->required();
  counter->add_option("--d", counter_args.d)->required();
  counter->add_option("--gammas", counter_args.gammas, "Comma-separated indices")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  if (*analyze) {
    analyze_args.format = as_json ? OutputFormat::kJson : OutputFormat::kText;
    analyze_args.include_timing = !no_timing;
    if (analyze->count("--omega-max")) analyze_args.omega_max = omega_max;
    if (!direction.empty()) analyze_args.direction = direction;
    return run_analyze(analyze_args, std::cout, std::cerr);
  }
  if (*admissible) return run_admissible(admissible_args, std::cout, std::cerr);
  if (*nyquist) return run_nyquist(nyquist_args, std::cout, std::cerr);
  return run_counterexample(counter_args, std::cout, std::cerr);
}
