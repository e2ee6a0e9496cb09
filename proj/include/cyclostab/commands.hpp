#pragma once

// Subcommand implementations behind the command-line tool. Each writes to
// the given streams and returns the process exit code.

#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cyclostab/analysis.hpp"
#include "cyclostab/criterion.hpp"
#include "cyclostab/error.hpp"
#include "cyclostab/plot.hpp"
#include "cyclostab/polynomial.hpp"
#include "cyclostab/systems.hpp"

namespace cyclostab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitCriterionFails = 3;
inline constexpr int kExitMarginal = 4;

enum class OutputFormat { kText, kJson };

struct AnalyzeArgs {
  std::string config_path;
  OutputFormat format = OutputFormat::kText;
  std::optional<double> omega_max;
  std::optional<std::string> direction;
  bool include_timing = true;
};

struct AdmissibleArgs {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  int n = 2;
};

struct NyquistArgs {
  std::string config_path;
  int subsystem = 1;  // 1-based
  std::string out_prefix;
};

struct CounterexampleArgs {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  std::vector<double> gammas;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline AnalysisConfig load_config(const std::string& path) { return parse_config_text(read_file(path)); }

inline int run_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    AnalysisConfig cfg = load_config(args.config_path);
    if (args.omega_max) {
      if (!(*args.omega_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--omega-max must be positive");
      cfg.options.omega_max = args.omega_max;
    }
    if (args.direction) cfg.options.direction = parse_direction(*args.direction);
    const AnalysisReport report = analyze(cfg);
    if (args.format == OutputFormat::kJson) {
      out << report_json(report, args.include_timing).dump(2) << "\n";
    } else {
      out << report_text(report);
    }
    return exit_code(report.verdict);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitInputError;
  }
}

inline Json admissible_json(const MobiusParams& p, int n) {
  const GammaIntervalSet set = admissible_gamma_set(p, n);
  const BetaPair beta = beta_values(n);
  Json j;
  j["mobius"] = mobius_json(p);
  j["n"] = n;
  j["beta"] = Json::array({number_json(beta.first), number_json(beta.second)});
  j["intervals"] = intervals_json(set);
  j["direction"] = to_string(direction_for(set));
  return j;
}

inline int run_admissible(const AdmissibleArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.n < 2) throw Error(ErrorCode::kInvalidArgument, "n must be at least 2");
    const MobiusParams p(args.a, args.b, args.c, args.d);
    out << admissible_json(p, args.n).dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitInputError;
  }
}

inline int run_nyquist(const NyquistArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const AnalysisConfig cfg = load_config(args.config_path);
    const int n = static_cast<int>(cfg.subsystems.size());
    if (args.subsystem < 1 || args.subsystem > n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "subsystem index " + std::to_string(args.subsystem) + " outside 1.." + std::to_string(n));
    }
    if (args.out_prefix.empty()) throw Error(ErrorCode::kInvalidArgument, "--out prefix is required");
    const MobiusParams p = cfg.params();
    const DelaySystem sys = cfg.subsystems[static_cast<std::size_t>(args.subsystem - 1)].build();
    const Direction dir = cfg.options.direction ? *cfg.options.direction : direction_for(admissible_gamma_set(p, n));
    IndexOptions opts;
    opts.n_points = cfg.options.n_points;
    if (cfg.options.omega_max) opts.omega_max = *cfg.options.omega_max;
    const IndexResult index = subsystem_index(sys, p, dir, opts);

    const NyquistPlot plot = make_nyquist_plot(sys, p, args.subsystem, index.gamma_k, opts.omega_max, opts.n_points);
    const std::string svg_path = args.out_prefix + ".svg";
    const std::string csv_path = args.out_prefix + ".csv";
    std::ofstream svg(svg_path, std::ios::binary);
    std::ofstream csv(csv_path, std::ios::binary);
    if (!svg || !csv) throw Error(ErrorCode::kInvalidArgument, "cannot write output files with prefix '" + args.out_prefix + "'");
    svg << nyquist_svg(plot);
    csv << nyquist_csv(plot.curve);
    out << "wrote " << svg_path << " and " << csv_path << " (gamma = " << format_number(index.gamma_k) << ")\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitInputError;
  }
}

inline Complex nearest_root(const std::vector<Complex>& roots, Complex target) {
  Complex best = roots.front();
  for (const Complex& r : roots) {
    if (std::abs(r - target) < std::abs(best - target)) best = r;
  }
  return best;
}

inline int run_counterexample(const CounterexampleArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const MobiusParams p(args.a, args.b, args.c, args.d);
    const GammaList gammas(args.gammas);
    const int n = gammas.size();
    const double gamma_bar = geometric_mean(gammas);
    if (inequality_holds(p, n, gamma_bar)) {
      err << "criterion holds; no counterexample exists\n";
      return kExitCriterionFails;
    }
    const auto construction = destabilizing_subsystems(p, gammas);
    if (!construction) {
      err << "no singular R matrix was found for these data\n";
      return kExitCriterionFails;
    }
    std::vector<FactorPair> pairs;
    Json j;
    j["mobius"] = mobius_json(p);
    Json gl = Json::array();
    for (double g : gammas.values()) gl.push_back(number_json(g));
    j["gammas"] = gl;
    j["gamma_bar"] = number_json(gamma_bar);
    Json subs = Json::array();
    for (std::size_t k = 0; k < construction->factors.size(); ++k) {
      const DestabilizingFactor& f = construction->factors[k];
      pairs.push_back({f.num, f.den});
      Json o;
      o["index"] = k + 1;
      o["alpha"] = number_json(f.alpha);
      o["theta"] = number_json(f.theta);
      o["phi"] = number_json(f.phi);
      o["N"] = coefficients_json(f.num);
      o["M"] = coefficients_json(f.den);
      subs.push_back(o);
    }
    j["subsystems"] = subs;
    const RealPolynomial cl = closed_loop_char_poly(pairs);
    j["closed_loop_polynomial"] = coefficients_json(cl);
    const std::vector<Complex> roots = poly_roots(cl);
    if (roots.empty()) throw Error(ErrorCode::kZeroPolynomial, "closed-loop polynomial has no roots");
    const Complex r = nearest_root(roots, Complex(0.0, 1.0));
    j["root_nearest_i"] = complex_json(r);
    j["distance_to_i"] = number_json(std::abs(r - Complex(0.0, 1.0)));
    j["residual_at_i"] = number_json(std::abs(cl.eval(Complex(0.0, 1.0))) / cl.abs_eval(1.0));
    out << j.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace cyclostab
