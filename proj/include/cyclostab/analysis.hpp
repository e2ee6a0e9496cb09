#pragma once

// Configuration files, the end-to-end analysis pipeline, and its reports.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclostab/criterion.hpp"
#include "cyclostab/error.hpp"
#include "cyclostab/indexing.hpp"
#include "cyclostab/mobius.hpp"
#include "cyclostab/systems.hpp"

namespace cyclostab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Rounds to 12 significant digits so printed reports are byte-stable.
inline double round_sig(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline Json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return round_sig(x);
}

inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Json complex_json(Complex z) { return Json::array({number_json(z.real()), number_json(z.imag())}); }

inline Json coefficients_json(const RealPolynomial& p) {
  Json arr = Json::array();
  for (double c : p.coefficients()) arr.push_back(number_json(c));
  return arr;
}

inline Json intervals_json(const GammaIntervalSet& set) {
  Json arr = Json::array();
  for (const auto& iv : set.intervals()) arr.push_back(Json::array({number_json(iv.lo), number_json(iv.hi)}));
  return arr;
}

inline std::string intervals_text(const GammaIntervalSet& set) {
  if (set.empty()) return "(empty)";
  std::string out;
  for (const auto& iv : set.intervals()) {
    if (!out.empty()) out += " U ";
    out += "(" + format_number(iv.lo) + ", " + format_number(iv.hi) + ")";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration.

struct SubsystemConfig {
  std::vector<double> num{1.0};
  std::vector<double> den{1.0};
  double delay = 0.0;
  std::optional<double> gain;  // shorthand for num = {gain}, den = {1}

  DelaySystem build() const {
    if (gain) return DelaySystem(RationalSystem::gain(*gain), delay);
    return DelaySystem(RationalSystem(RealPolynomial(num), RealPolynomial(den)), delay);
  }
};

struct AnalysisOptions {
  std::optional<double> omega_max;
  std::optional<Direction> direction;
  int n_points = 4000;
  double marginal_tolerance = 1e-9;
};

struct AnalysisConfig {
  int schema_version = kSchemaVersion;
  std::array<double, 4> mobius{1.0, 0.0, 0.0, 1.0};
  std::vector<SubsystemConfig> subsystems;
  AnalysisOptions options;

  MobiusParams params() const { return {mobius[0], mobius[1], mobius[2], mobius[3]}; }
};

inline Direction parse_direction(const std::string& s) {
  if (s == "min" || s == "minimize") return Direction::kMinimize;
  if (s == "max" || s == "maximize") return Direction::kMaximize;
  if (s == "both") return Direction::kBoth;
  throw Error(ErrorCode::kParseError, "direction must be min, max or both (got '" + s + "')");
}

namespace detail {

inline std::vector<double> coefficient_list(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::kParseError, std::string(what) + " must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::kParseError, std::string(what) + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline double required_number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::kParseError, std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace detail

/// Validates the whole configuration, including building every subsystem.
inline AnalysisConfig parse_config(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  AnalysisConfig cfg;
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    throw Error(ErrorCode::kParseError, "missing integer 'schema_version'");
  }
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kParseError, "unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  if (!j.contains("mobius") || !j.at("mobius").is_object()) throw Error(ErrorCode::kParseError, "missing 'mobius'");
  const Json& m = j.at("mobius");
  cfg.mobius = {detail::required_number(m, "a"), detail::required_number(m, "b"), detail::required_number(m, "c"),
                detail::required_number(m, "d")};
  (void)cfg.params();  // ad - bc != 0

  if (!j.contains("subsystems") || !j.at("subsystems").is_array()) {
    throw Error(ErrorCode::kParseError, "missing 'subsystems' array");
  }
  for (const Json& s : j.at("subsystems")) {
    if (!s.is_object()) throw Error(ErrorCode::kParseError, "each subsystem must be an object");
    SubsystemConfig sub;
    if (s.contains("gain")) {
      sub.gain = detail::required_number(s, "gain");
    } else {
      if (!s.contains("num") || !s.contains("den")) {
        throw Error(ErrorCode::kParseError, "subsystem needs 'gain' or both 'num' and 'den'");
      }
      sub.num = detail::coefficient_list(s.at("num"), "num");
      sub.den = detail::coefficient_list(s.at("den"), "den");
    }
    if (s.contains("delay")) sub.delay = detail::required_number(s, "delay");
    (void)sub.build();
    cfg.subsystems.push_back(std::move(sub));
  }
  if (cfg.subsystems.size() < 2) throw Error(ErrorCode::kParseError, "need at least two subsystems");

  if (j.contains("options")) {
    const Json& o = j.at("options");
    if (!o.is_object()) throw Error(ErrorCode::kParseError, "'options' must be an object");
    if (o.contains("omega_max") && !o.at("omega_max").is_null()) {
      cfg.options.omega_max = detail::required_number(o, "omega_max");
      if (!(*cfg.options.omega_max > 0.0)) throw Error(ErrorCode::kParseError, "omega_max must be positive");
    }
    if (o.contains("direction") && !o.at("direction").is_null()) {
      if (!o.at("direction").is_string()) throw Error(ErrorCode::kParseError, "direction must be a string");
      const auto d = o.at("direction").get<std::string>();
      if (d != "auto") cfg.options.direction = parse_direction(d);
    }
    if (o.contains("n_points")) {
      if (!o.at("n_points").is_number_integer()) throw Error(ErrorCode::kParseError, "n_points must be an integer");
      cfg.options.n_points = o.at("n_points").get<int>();
      if (cfg.options.n_points < 16) throw Error(ErrorCode::kParseError, "n_points must be at least 16");
    }
    if (o.contains("marginal_tolerance")) {
      cfg.options.marginal_tolerance = detail::required_number(o, "marginal_tolerance");
    }
  }
  return cfg;
}

inline AnalysisConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, e.what());
  }
}

inline Json to_json(const AnalysisConfig& cfg) {
  Json j;
  j["schema_version"] = cfg.schema_version;
  j["mobius"] = {{"a", cfg.mobius[0]}, {"b", cfg.mobius[1]}, {"c", cfg.mobius[2]}, {"d", cfg.mobius[3]}};
  Json subs = Json::array();
  for (const auto& s : cfg.subsystems) {
    Json o;
    if (s.gain) {
      o["gain"] = *s.gain;
    } else {
      o["num"] = s.num;
      o["den"] = s.den;
    }
    if (s.delay != 0.0) o["delay"] = s.delay;
    subs.push_back(o);
  }
  j["subsystems"] = subs;
  Json opts;
  opts["omega_max"] = cfg.options.omega_max ? Json(*cfg.options.omega_max) : Json(nullptr);
  opts["direction"] = cfg.options.direction ? to_string(*cfg.options.direction) : "auto";
  opts["n_points"] = cfg.options.n_points;
  opts["marginal_tolerance"] = cfg.options.marginal_tolerance;
  j["options"] = opts;
  return j;
}

inline Interconnection build_interconnection(const AnalysisConfig& cfg) {
  std::vector<DelaySystem> subs;
  for (const auto& s : cfg.subsystems) subs.push_back(s.build());
  return Interconnection(std::move(subs), cfg.params());
}

// ---------------------------------------------------------------------------
// Analysis.

enum class Verdict { kRobustlyStable, kCriterionFails, kMarginal };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kRobustlyStable: return "robustly-stable";
    case Verdict::kCriterionFails: return "criterion-fails";
    case Verdict::kMarginal: return "marginal";
  }
  return "unknown";
}

/// 0 satisfied, 3 fails, 4 marginal. Input errors (2) never reach a verdict.
inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kRobustlyStable: return 0;
    case Verdict::kCriterionFails: return 3;
    case Verdict::kMarginal: return 4;
  }
  return 3;
}

struct InequalityTerm {
  double beta = 0.0;
  double value = 0.0;
  bool holds = false;
  bool marginal = false;
};

struct AnalysisReport {
  MobiusParams mobius = MobiusParams::identity();
  int n = 0;
  BetaPair beta{};
  GammaIntervalSet admissible;
  Direction direction = Direction::kMinimize;
  std::vector<IndexResult> subsystems;
  /// "lower" or "upper": which index of each subsystem feeds gamma_bar.
  std::string bound = "lower";
  std::vector<double> gammas;
  double gamma_bar = 0.0;
  std::array<InequalityTerm, 2> inequality{};
  bool stability_checks_passed = false;
  bool marginal = false;
  Verdict verdict = Verdict::kCriterionFails;
  std::optional<std::string> seed;
  double elapsed_ms = 0.0;
};

namespace detail {

struct Evaluation {
  std::vector<double> gammas;
  double gamma_bar = 0.0;
  std::array<InequalityTerm, 2> terms{};
  bool checks = true;
  bool marginal = false;
  bool holds = false;
};

inline Evaluation evaluate_bound(const MobiusParams& p, int n, const std::vector<IndexResult>& results, bool upper,
                                 double marginal_tol) {
  Evaluation e;
  for (const auto& r : results) {
    const IndexBound& b = upper ? *r.upper : *r.lower;
    e.gammas.push_back(b.gamma);
    e.checks = e.checks && b.stability_check_passed;
    e.marginal = e.marginal || b.marginal;
  }
  e.gamma_bar = geometric_mean(GammaList(e.gammas));
  const BetaPair beta = beta_values(n);
  const std::array<double, 2> betas{beta.first, beta.second};
  for (std::size_t i = 0; i < 2; ++i) {
    InequalityTerm& t = e.terms[i];
    t.beta = betas[i];
    t.value = criterion_quadratic(p, t.beta, e.gamma_bar);
    t.holds = t.value > 0.0;
    t.marginal = std::abs(t.value) < marginal_tol * criterion_quadratic_scale(p, t.beta, e.gamma_bar);
    e.marginal = e.marginal || t.marginal;
  }
  e.holds = e.terms[0].holds && e.terms[1].holds;
  return e;
}

}  // namespace detail

/// Per-subsystem indices (computed in parallel), their geometric mean, and the verdict.
inline AnalysisReport analyze(const AnalysisConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Interconnection inter = build_interconnection(cfg);
  const MobiusParams p = inter.mobius;

  AnalysisReport report;
  report.mobius = p;
  report.n = inter.size();
  report.beta = beta_values(report.n);
  report.admissible = admissible_gamma_set(p, report.n);
  report.direction = cfg.options.direction ? *cfg.options.direction : direction_for(report.admissible);

  IndexOptions opts;
  opts.n_points = cfg.options.n_points;
  if (cfg.options.omega_max) opts.omega_max = *cfg.options.omega_max;

  std::vector<std::future<IndexResult>> jobs;
  for (const auto& sys : inter.subsystems) {
    jobs.push_back(std::async(std::launch::async, [&sys, &p, &report, &opts] {
      return subsystem_index(sys, p, report.direction, opts);
    }));
  }
  for (auto& job : jobs) report.subsystems.push_back(job.get());

  const bool all_lower = std::all_of(report.subsystems.begin(), report.subsystems.end(),
                                     [](const IndexResult& r) { return r.lower.has_value(); });
  const bool all_upper = std::all_of(report.subsystems.begin(), report.subsystems.end(),
                                     [](const IndexResult& r) { return r.upper.has_value(); });
  const double tol = cfg.options.marginal_tolerance;
  std::optional<detail::Evaluation> chosen;
  if (all_lower) {
    chosen = detail::evaluate_bound(p, report.n, report.subsystems, false, tol);
    report.bound = "lower";
  }
  if (all_upper && (!chosen || !(chosen->holds && chosen->checks))) {
    auto alt = detail::evaluate_bound(p, report.n, report.subsystems, true, tol);
    if (!chosen || (alt.holds && alt.checks)) {
      chosen = std::move(alt);
      report.bound = "upper";
    }
  }
  if (!chosen) throw Error(ErrorCode::kUnboundable, "no subsystem index could be formed in a common direction");

  report.gammas = chosen->gammas;
  report.gamma_bar = chosen->gamma_bar;
  report.inequality = chosen->terms;
  report.stability_checks_passed = chosen->checks;
  report.marginal = chosen->marginal;
  if (chosen->holds && chosen->checks && !chosen->marginal) {
    report.verdict = Verdict::kRobustlyStable;
  } else if (chosen->marginal) {
    report.verdict = Verdict::kMarginal;
  } else {
    report.verdict = Verdict::kCriterionFails;
  }
  if (const char* seed = std::getenv("CYCLOSTAB_SEED")) report.seed = seed;
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline Json mobius_json(const MobiusParams& p) {
  return {{"a", number_json(p.a())}, {"b", number_json(p.b())}, {"c", number_json(p.c())}, {"d", number_json(p.d())}};
}

inline Json report_json(const AnalysisReport& r, bool include_timing = true) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mobius"] = mobius_json(r.mobius);
  j["n"] = r.n;
  j["beta"] = Json::array({number_json(r.beta.first), number_json(r.beta.second)});
  j["admissible"] = intervals_json(r.admissible);
  j["direction"] = to_string(r.direction);
  j["bound"] = r.bound;
  Json subs = Json::array();
  for (std::size_t k = 0; k < r.subsystems.size(); ++k) {
    const IndexResult& s = r.subsystems[k];
    const IndexBound& b = r.bound == "upper" ? *s.upper : *s.lower;
    Json o;
    o["index"] = k + 1;
    o["gamma"] = number_json(b.gamma);
    o["stability_check"] = b.stability_check_passed;
    o["winding"] = b.winding;
    o["required_winding"] = b.required_winding;
    o["marginal"] = b.marginal;
    if (s.lower) o["gamma_min"] = number_json(s.lower->gamma);
    if (s.upper) o["gamma_max"] = number_json(s.upper->gamma);
    subs.push_back(o);
  }
  j["subsystems"] = subs;
  j["gamma_bar"] = number_json(r.gamma_bar);
  Json ineq = Json::array();
  for (const auto& t : r.inequality) {
    ineq.push_back({{"beta", number_json(t.beta)},
                    {"value", number_json(t.value)},
                    {"holds", t.holds},
                    {"marginal", t.marginal}});
  }
  j["inequality"] = ineq;
  j["marginal"] = r.marginal;
  j["verdict"] = to_string(r.verdict);
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  if (include_timing) j["timing_ms"] = r.elapsed_ms;
  return j;
}

inline std::string report_text(const AnalysisReport& r) {
  std::ostringstream out;
  out << "cyclic interconnection, n = " << r.n << "\n";
  out << "mobius map: a = " << format_number(r.mobius.a()) << ", b = " << format_number(r.mobius.b())
      << ", c = " << format_number(r.mobius.c()) << ", d = " << format_number(r.mobius.d()) << "\n";
  out << "beta: " << format_number(r.beta.first) << ", " << format_number(r.beta.second) << "\n";
  out << "admissible gamma_bar: " << intervals_text(r.admissible) << "\n";
  out << "index direction: " << to_string(r.direction) << " (using " << r.bound << " indices)\n";
  for (std::size_t k = 0; k < r.subsystems.size(); ++k) {
    const IndexResult& s = r.subsystems[k];
    const IndexBound& b = r.bound == "upper" ? *s.upper : *s.lower;
    out << "  G" << k + 1 << ": gamma = " << format_number(b.gamma)
        << ", stability check " << (b.stability_check_passed ? "passed" : "FAILED")
        << " (winding " << b.winding << ", required " << b.required_winding << ")"
        << (b.marginal ? ", marginal" : "") << "\n";
  }
  out << "gamma_bar = " << format_number(r.gamma_bar) << "\n";
  for (const auto& t : r.inequality) {
    out << "  beta = " << format_number(t.beta) << ": quadratic = " << format_number(t.value)
        << (t.holds ? " > 0" : " <= 0") << (t.marginal ? " (marginal)" : "") << "\n";
  }
  out << "verdict: " << to_string(r.verdict) << "\n";
  return out.str();
}

}  // namespace cyclostab
