#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "htlab/decompose.hpp"
#include "htlab/dist.hpp"
#include "htlab/errors.hpp"
#include "htlab/limits.hpp"
#include "htlab/matrix.hpp"
#include "htlab/norms.hpp"
#include "htlab/rng.hpp"

namespace htlab::xlab {

using json = nlohmann::json;

/// Configuration problems (bad syntax, unknown or missing keys). The CLI
/// maps these to the usage exit code.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int restarts = 0;  // 0 = size-dependent default (50 for n <= 100, else 20)
  double tol = 1e-12;
  int max_iter = 10000;
  std::string method = "auto";  // auto | eigen | power | ascent | bounds_only
  double trial_timeout = 0.0;   // seconds per trial; 0 = none
};

struct ExperimentConfig {
  limits::TheoremId theorem = limits::TheoremId::RTOP1;
  double alpha = 1.0;
  double r = 2.0;
  double p = 2.0;
  double mu = 0.0;
  dist::SvFamily family = dist::SvFamily::constant;
  double log_c = 1.0;
  dist::SignMode sign = dist::SignMode::symmetric;
  double sign_q = 0.5;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 1;
  SolverConfig solver;
  std::size_t reference_size = 2000;
  std::string records_path;
  std::string summary_path;
  std::string plotdata_path;
};

// ---------------------------------------------------------------------------
// Config file parsing (flat key=value lines; '#' starts a comment)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "Inf" || v == "INF")
    return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse real '" + v + "'");
  }
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse count '" + v + "'");
  }
}

inline std::vector<std::uint64_t> parse_grid(const std::string& key,
                                             const std::string& v) {
  std::vector<std::uint64_t> grid;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) grid.push_back(parse_count(key, tok));
  }
  if (grid.empty()) throw config_error("config key '" + key + "': empty grid");
  return grid;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  bool got_theorem = false, got_alpha = false, got_grid = false,
       got_trials = false, got_seed = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key == "theorem") {
      const auto id = limits::parse_theorem(val);
      if (!id) throw config_error("config key 'theorem': unknown id '" + val + "'");
      cfg.theorem = *id;
      got_theorem = true;
    } else if (key == "alpha") {
      cfg.alpha = detail::parse_real(key, val);
      got_alpha = true;
    } else if (key == "r") {
      cfg.r = detail::parse_real(key, val);
    } else if (key == "p") {
      cfg.p = detail::parse_real(key, val);
    } else if (key == "mu") {
      cfg.mu = detail::parse_real(key, val);
    } else if (key == "family") {
      if (val == "constant")
        cfg.family = dist::SvFamily::constant;
      else if (val == "log_power")
        cfg.family = dist::SvFamily::log_power;
      else
        throw config_error("config key 'family': unknown family '" + val + "'");
    } else if (key == "log_c") {
      cfg.log_c = detail::parse_real(key, val);
    } else if (key == "sign") {
      if (val == "symmetric")
        cfg.sign = dist::SignMode::symmetric;
      else if (val == "positive")
        cfg.sign = dist::SignMode::positive;
      else if (val == "two_point")
        cfg.sign = dist::SignMode::two_point;
      else
        throw config_error("config key 'sign': unknown mode '" + val + "'");
    } else if (key == "sign_q") {
      cfg.sign_q = detail::parse_real(key, val);
    } else if (key == "n_grid") {
      cfg.n_grid = detail::parse_grid(key, val);
      got_grid = true;
    } else if (key == "trials") {
      cfg.trials = detail::parse_count(key, val);
      got_trials = true;
    } else if (key == "master_seed") {
      cfg.master_seed = detail::parse_count(key, val);
      got_seed = true;
    } else if (key == "solver_restarts") {
      cfg.solver.restarts = static_cast<int>(detail::parse_count(key, val));
    } else if (key == "solver_tol") {
      cfg.solver.tol = detail::parse_real(key, val);
    } else if (key == "solver_max_iter") {
      cfg.solver.max_iter = static_cast<int>(detail::parse_count(key, val));
    } else if (key == "solver_method") {
      if (val != "auto" && val != "eigen" && val != "power" && val != "ascent" &&
          val != "bounds_only")
        throw config_error("config key 'solver_method': unknown method '" + val + "'");
      cfg.solver.method = val;
    } else if (key == "trial_timeout") {
      cfg.solver.trial_timeout = detail::parse_real(key, val);
    } else if (key == "reference_size") {
      cfg.reference_size = static_cast<std::size_t>(detail::parse_count(key, val));
    } else if (key == "records_path") {
      cfg.records_path = val;
    } else if (key == "summary_path") {
      cfg.summary_path = val;
    } else if (key == "plotdata_path") {
      cfg.plotdata_path = val;
    } else {
      throw config_error("unknown config key '" + key + "'");
    }
  }
  if (!got_theorem) throw config_error("missing config key 'theorem'");
  if (!got_alpha) throw config_error("missing config key 'alpha'");
  if (!got_grid) throw config_error("missing config key 'n_grid'");
  if (!got_trials) throw config_error("missing config key 'trials'");
  if (!got_seed) throw config_error("missing config key 'master_seed'");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open config file '" + path + "'");
  return parse_config(is);
}

/// Entry law implied by a config: centering follows the theorem.
inline dist::HeavyTailLaw law_for(const ExperimentConfig& cfg) {
  dist::HeavyTailLaw law;
  law.alpha = cfg.alpha;
  law.family = cfg.family;
  law.log_c = cfg.log_c;
  law.sign = cfg.sign;
  law.sign_q = cfg.sign_q;
  law.centered = limits::requires_centered_law(cfg.theorem);
  return law;
}

inline limits::TheoremParams theorem_params(const ExperimentConfig& cfg,
                                            std::uint64_t n = 0) {
  return {cfg.alpha, cfg.r, cfg.p, cfg.mu, n};
}

inline void validate(const ExperimentConfig& cfg) {
  limits::require_valid(cfg.theorem, theorem_params(cfg));
  dist::check(law_for(cfg));
  if (cfg.n_grid.empty()) throw config_error("n_grid must be nonempty");
  for (std::size_t i = 0; i + 1 < cfg.n_grid.size(); ++i)
    if (!(cfg.n_grid[i] < cfg.n_grid[i + 1]))
      throw config_error("n_grid must be strictly increasing");
  for (std::uint64_t n : cfg.n_grid)
    if (n < 2) throw config_error("n_grid entries must be >= 2");
  if (cfg.trials < 1) throw config_error("trials must be >= 1");
  if (cfg.reference_size == 0) throw config_error("reference_size must be >= 1");
}

// ---------------------------------------------------------------------------
// Trial records
// ---------------------------------------------------------------------------

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

/// Entry-law and exponent parameters frozen into each record so a records
/// file is self-describing (the `report` subcommand rebuilds summaries from
/// records alone).
struct TrialParams {
  double alpha = 1.0;
  double r = 2.0;
  double p = 2.0;
  double mu = 0.0;
  std::string family = "constant";
  double log_c = 1.0;
  std::string sign = "symmetric";
  double sign_q = 0.5;
  double b_n = 0.0;
};

struct TrialRecord {
  limits::TheoremId theorem = limits::TheoremId::RTOP1;
  std::uint64_t n = 0;
  std::uint64_t trial_index = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | timed_out | refused
  std::string note;
  double raw_statistic = kAbsent;
  double normalized_statistic = kAbsent;
  std::string solver_method;
  double kkt_residual = kAbsent;
  double sandwich_lower = kAbsent;
  double sandwich_upper = kAbsent;
  double large_part_statistic = kAbsent;  // raw closed-form surrogate
  std::int64_t dec_large_count = -1;
  std::int64_t dec_inter_count = -1;
  std::int64_t dec_kappa = -1;
  double dec_row_sum_ratio = kAbsent;
  double wall_time = 0.0;
  TrialParams params;
};

namespace detail {

inline json real_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline double real_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kAbsent;
  return j.at(key).get<double>();
}

inline json count_or_null(std::int64_t v) {
  if (v < 0) return nullptr;
  return v;
}

inline std::int64_t count_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return -1;
  return j.at(key).get<std::int64_t>();
}

}  // namespace detail

inline json to_json(const TrialRecord& rec) {
  json dec;
  dec["large_count"] = detail::count_or_null(rec.dec_large_count);
  dec["inter_count"] = detail::count_or_null(rec.dec_inter_count);
  dec["kappa"] = detail::count_or_null(rec.dec_kappa);
  dec["row_sum_ratio"] = detail::real_or_null(rec.dec_row_sum_ratio);
  json par;
  par["alpha"] = rec.params.alpha;
  par["r"] = detail::real_or_null(rec.params.r);
  par["p"] = detail::real_or_null(rec.params.p);
  par["mu"] = rec.params.mu;
  par["family"] = rec.params.family;
  par["log_c"] = rec.params.log_c;
  par["sign"] = rec.params.sign;
  par["sign_q"] = rec.params.sign_q;
  par["b_n"] = rec.params.b_n;
  if (std::isinf(rec.params.r)) par["r"] = "inf";
  if (std::isinf(rec.params.p)) par["p"] = "inf";
  json j;
  j["theorem"] = limits::theorem_name(rec.theorem);
  j["n"] = rec.n;
  j["trial_index"] = rec.trial_index;
  j["seed"] = rec.seed;
  j["status"] = rec.status;
  j["note"] = rec.note;
  j["raw_statistic"] = detail::real_or_null(rec.raw_statistic);
  j["normalized_statistic"] = detail::real_or_null(rec.normalized_statistic);
  j["solver_method"] = rec.solver_method;
  j["kkt_residual"] = detail::real_or_null(rec.kkt_residual);
  j["sandwich_lower"] = detail::real_or_null(rec.sandwich_lower);
  j["sandwich_upper"] = detail::real_or_null(rec.sandwich_upper);
  j["large_part_statistic"] = detail::real_or_null(rec.large_part_statistic);
  j["decomposition"] = dec;
  j["wall_time"] = rec.wall_time;
  j["params"] = par;
  return j;
}

inline TrialRecord record_from_json(const json& j) {
  TrialRecord rec;
  const auto id = limits::parse_theorem(j.at("theorem").get<std::string>());
  if (!id) throw io_error("record has unknown theorem id");
  rec.theorem = *id;
  rec.n = j.at("n").get<std::uint64_t>();
  rec.trial_index = j.at("trial_index").get<std::uint64_t>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.status = j.at("status").get<std::string>();
  rec.note = j.value("note", std::string{});
  rec.raw_statistic = detail::real_from(j, "raw_statistic");
  rec.normalized_statistic = detail::real_from(j, "normalized_statistic");
  rec.solver_method = j.value("solver_method", std::string{});
  rec.kkt_residual = detail::real_from(j, "kkt_residual");
  rec.sandwich_lower = detail::real_from(j, "sandwich_lower");
  rec.sandwich_upper = detail::real_from(j, "sandwich_upper");
  rec.large_part_statistic = detail::real_from(j, "large_part_statistic");
  const auto& dec = j.at("decomposition");
  rec.dec_large_count = detail::count_from(dec, "large_count");
  rec.dec_inter_count = detail::count_from(dec, "inter_count");
  rec.dec_kappa = detail::count_from(dec, "kappa");
  rec.dec_row_sum_ratio = detail::real_from(dec, "row_sum_ratio");
  rec.wall_time = j.value("wall_time", 0.0);
  const auto& par = j.at("params");
  rec.params.alpha = par.at("alpha").get<double>();
  rec.params.r = par.at("r").is_string() ? std::numeric_limits<double>::infinity()
                                         : detail::real_from(par, "r");
  rec.params.p = par.at("p").is_string() ? std::numeric_limits<double>::infinity()
                                         : detail::real_from(par, "p");
  rec.params.mu = par.at("mu").get<double>();
  rec.params.family = par.at("family").get<std::string>();
  rec.params.log_c = par.at("log_c").get<double>();
  rec.params.sign = par.at("sign").get<std::string>();
  rec.params.sign_q = par.at("sign_q").get<double>();
  rec.params.b_n = par.at("b_n").get<double>();
  return rec;
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct SummaryRow {
  std::uint64_t n = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double b_n = 0.0;
  double ks = kAbsent;
  double q05 = kAbsent, q25 = kAbsent, q50 = kAbsent, q75 = kAbsent, q95 = kAbsent;
  double median_gap = kAbsent;             // median |raw - large part| / b_n
  double median_sandwich_width = kAbsent;  // median (U - L) / fluctuation scale
  double median_kkt = kAbsent;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::map<std::uint64_t, limits::ReferenceDistribution> references;
};

// ---------------------------------------------------------------------------
// Statistic dispatch
// ---------------------------------------------------------------------------

namespace detail {

inline bool strictly_positive(const mat::SymmetricMatrix& a) {
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i; j < a.n(); ++j)
      if (!(a(i, j) > 0.0)) return false;
  return true;
}

/// Exponents the decomposition thresholds and closed-form surrogates use:
/// quadratic-form statistics behave like the r -> r* norm, the ground
/// state like inf -> 1.
inline std::pair<double, double> decomposition_exponents(limits::TheoremId id,
                                                         double r, double p) {
  if (id == limits::TheoremId::GROUND)
    return {std::numeric_limits<double>::infinity(), 1.0};
  if (limits::is_grothendieck(id)) return {r, norms::conjugate_exponent(r)};
  return {r, p};
}

}  // namespace detail

/// Default solver routing for r -> p norms: exact eigensolve at r = p = 2,
/// the power method on strictly positive matrices with finite 1 < p <= r,
/// multistart ascent otherwise (extreme exponents handled inside).
inline norms::NormCertificate solve_norm_auto(const mat::SymmetricMatrix& a,
                                              const norms::NormProblem& prob,
                                              const norms::SolveOptions& opts,
                                              Rng& rng) {
  if (prob.r == 2.0 && prob.p == 2.0) return norms::eigen_norm(a);
  if (prob.finite() && prob.p > 1.0 && prob.p <= prob.r &&
      detail::strictly_positive(a))
    return norms::boyd_power_method(a, prob, opts);
  return norms::multistart_ascent(a, prob, opts, rng);
}

inline TrialRecord run_trial(const ExperimentConfig& cfg,
                             const dist::HeavyTailLaw& law, std::uint64_t n,
                             std::uint64_t t) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.theorem = cfg.theorem;
  rec.n = n;
  rec.trial_index = t;
  rec.seed = Rng::stream_seed(cfg.master_seed, n, t);
  rec.params.alpha = cfg.alpha;
  rec.params.r = cfg.r;
  rec.params.p = cfg.p;
  rec.params.mu = cfg.mu;
  rec.params.family =
      cfg.family == dist::SvFamily::constant ? "constant" : "log_power";
  rec.params.log_c = cfg.log_c;
  rec.params.sign = cfg.sign == dist::SignMode::symmetric
                        ? "symmetric"
                        : (cfg.sign == dist::SignMode::positive ? "positive"
                                                                : "two_point");
  rec.params.sign_q = cfg.sign_q;
  rec.params.b_n = dist::quantile_b_n(law, n);

  norms::SolveOptions opts;
  opts.restarts = cfg.solver.restarts > 0 ? cfg.solver.restarts
                                          : (n <= 100 ? 50 : 20);
  opts.tol = cfg.solver.tol;
  opts.max_iter = cfg.solver.max_iter;
  if (cfg.solver.trial_timeout > 0.0)
    opts.deadline = start + std::chrono::duration_cast<
                                std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(
                                    cfg.solver.trial_timeout));

  try {
    Rng rng = Rng::stream(cfg.master_seed, n, t);
    mat::SymmetricMatrix a =
        mat::sample_matrix(law, static_cast<std::size_t>(n), rng);
    mat::SymmetricMatrix b = a;
    if (cfg.mu != 0.0)
      for (std::size_t i = 0; i < b.n(); ++i)
        for (std::size_t j = i; j < b.n(); ++j) b.at(i, j) += cfg.mu;

    // decomposition parts (skipped where no threshold regime applies)
    const auto [r_eff, p_eff] =
        detail::decomposition_exponents(cfg.theorem, cfg.r, cfg.p);
    const mat::Regime regime = limits::theorem_regime(cfg.theorem);
    double stat_gamma = kAbsent;
    mat::Decomposition dec;
    bool have_dec = false;
    try {
      const auto th = mat::default_thresholds(regime, cfg.alpha, r_eff, p_eff);
      dec = mat::decompose(a, cfg.alpha, th.eta, th.zeta);
      have_dec = true;
      stat_gamma = limits::theorem_gamma(cfg.theorem, cfg.r, cfg.p);
      rec.dec_large_count = static_cast<std::int64_t>(dec.large.entries.size());
      rec.dec_inter_count = static_cast<std::int64_t>(dec.inter.entries.size());
      std::vector<std::size_t> per_row(a.n(), 0);
      std::size_t kappa = 0;
      for (const auto& e : dec.inter.entries) {
        ++per_row[e.i];
        if (e.j != e.i) ++per_row[e.j];
      }
      for (std::size_t i = 0; i < a.n(); ++i) kappa = std::max(kappa, per_row[i]);
      rec.dec_kappa = static_cast<std::int64_t>(kappa);
      const auto top = mat::max_abs_entry(a);
      if (top.value > 0.0) {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.n(); ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < a.n(); ++j) s += std::abs(a(i, j));
          worst = std::max(worst, s);
        }
        rec.dec_row_sum_ratio = worst / top.value;
      }
    } catch (const unsupported_regime&) {
    } catch (const regime_violation&) {
    }

    // closed-form large-part surrogate (stable-power statistics only)
    if (have_dec && !std::isnan(stat_gamma) &&
        cfg.theorem != limits::TheoremId::GRO3 &&
        cfg.theorem != limits::TheoremId::RTOP3) {
      double top = 0.0;
      for (const auto& e : dec.large.entries)
        top = std::max(top, std::abs(e.value));
      if (top > 0.0) {
        double s = 0.0;
        for (const auto& e : dec.large.entries)
          s += (e.i == e.j ? 1.0 : 2.0) *
               std::pow(std::abs(e.value) / top, 1.0 / stat_gamma);
        rec.large_part_statistic = top * std::pow(s, stat_gamma);
      } else {
        rec.large_part_statistic = 0.0;
      }
      if (cfg.theorem == limits::TheoremId::GROUND)
        rec.large_part_statistic += [&] {
          double tr = 0.0;
          for (std::size_t i = 0; i < a.n(); ++i) tr += a(i, i);
          return tr;
        }();
    }

    // sandwich bounds for the shifted-mean theorems
    if (have_dec && (cfg.theorem == limits::TheoremId::GRO3 ||
                     cfg.theorem == limits::TheoremId::RTOP3)) {
      const auto bounds = norms::ansatz_bounds(cfg.mu, dec.inter, dec.large,
                                               norms::NormProblem(r_eff, p_eff));
      rec.sandwich_lower = bounds.lower;
      rec.sandwich_upper = bounds.upper;
    }

    // the statistic itself
    if (cfg.solver.method != "bounds_only") {
      norms::NormCertificate cert;
      if (cfg.theorem == limits::TheoremId::GROUND) {
        if (n <= 20) {
          auto gs = norms::ground_state(b);
          cert.value = gs.value;
          cert.method = norms::Method::hypercube;
        } else {
          // surrogate: trace plus twice the large off-diagonal magnitudes
          double v = 0.0;
          for (std::size_t i = 0; i < b.n(); ++i) v += b(i, i);
          for (const auto& e : dec.large.entries)
            if (e.i != e.j) v += 2.0 * std::abs(e.value);
          cert.value = v;
          cert.method = norms::Method::closed_form;
        }
      } else if (limits::is_grothendieck(cfg.theorem)) {
        cert = norms::grothendieck_value(b, cfg.r, opts, rng);
      } else if (cfg.solver.method == "eigen") {
        if (!(cfg.r == 2.0 && cfg.p == 2.0))
          throw unsupported_regime("eigen override needs r = p = 2");
        cert = norms::eigen_norm(b);
      } else if (cfg.solver.method == "power") {
        cert = norms::boyd_power_method(b, norms::NormProblem(cfg.r, cfg.p), opts);
      } else if (cfg.solver.method == "ascent") {
        cert = norms::multistart_ascent(b, norms::NormProblem(cfg.r, cfg.p),
                                        opts, rng);
      } else {
        cert = solve_norm_auto(b, norms::NormProblem(cfg.r, cfg.p), opts, rng);
      }
      rec.raw_statistic = cert.value;
      rec.solver_method = norms::method_name(cert.method);
      rec.kkt_residual = cert.kkt_residual;
      rec.normalized_statistic = limits::normalize_statistic(
          cfg.theorem, cert.value, n, rec.params.b_n, theorem_params(cfg, n));
      if (opts.expired()) rec.status = "timed_out";
    } else {
      rec.solver_method = "bounds_only";
    }
  } catch (const size_refusal& e) {
    rec.status = "refused";
    rec.note = e.what();
  } catch (const oracle_uncertain& e) {
    rec.status = "refused";
    rec.note = e.what();
  } catch (const unsupported_regime& e) {
    rec.status = "refused";
    rec.note = e.what();
  } catch (const not_pairable& e) {
    rec.status = "refused";
    rec.note = e.what();
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

namespace detail {

inline std::size_t worker_count(std::size_t slots) {
  std::size_t k = std::thread::hardware_concurrency();
  if (k == 0) k = 1;
  if (const char* env = std::getenv("HTLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) k = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(k, slots));
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return kAbsent;
  return limits::median(std::move(v));
}

}  // namespace detail

/// Build the per-n summary table (KS against the theorem reference,
/// quantiles, drift and sandwich medians) from finished records. The
/// reference sample for each n is drawn from a dedicated stream
/// (master_seed, n, 2^64-1), so summaries are deterministic too.
inline Summary summarize(const std::vector<TrialRecord>& records,
                         const ExperimentConfig& cfg) {
  Summary summary;
  const auto law = law_for(cfg);
  std::map<std::uint64_t, std::vector<const TrialRecord*>> by_n;
  for (const auto& rec : records) by_n[rec.n].push_back(&rec);
  for (const auto& [n, recs] : by_n) {
    SummaryRow row;
    row.n = n;
    row.trials = recs.size();
    row.b_n = dist::quantile_b_n(law, n);
    std::vector<double> normalized, gaps, widths, kkts;
    for (const auto* rec : recs) {
      if (rec->status != "ok") {
        ++row.failures;
        continue;
      }
      if (!std::isnan(rec->normalized_statistic))
        normalized.push_back(rec->normalized_statistic);
      if (!std::isnan(rec->raw_statistic) &&
          !std::isnan(rec->large_part_statistic))
        gaps.push_back(std::abs(rec->raw_statistic - rec->large_part_statistic) /
                       row.b_n);
      if (!std::isnan(rec->sandwich_lower) && !std::isnan(rec->sandwich_upper))
        widths.push_back(rec->sandwich_upper - rec->sandwich_lower);
      if (!std::isnan(rec->kkt_residual)) kkts.push_back(rec->kkt_residual);
    }
    Rng ref_rng = Rng::stream(cfg.master_seed, n,
                              std::numeric_limits<std::uint64_t>::max());
    auto ref = limits::reference_for(cfg.theorem, theorem_params(cfg, n), law,
                                     cfg.reference_size, ref_rng);
    if (!normalized.empty()) {
      row.ks = limits::ks_distance(normalized, ref);
      row.q05 = limits::quantile(normalized, 0.05);
      row.q25 = limits::quantile(normalized, 0.25);
      row.q50 = limits::quantile(normalized, 0.50);
      row.q75 = limits::quantile(normalized, 0.75);
      row.q95 = limits::quantile(normalized, 0.95);
    }
    row.median_gap = detail::median_of(std::move(gaps));
    if (!widths.empty() && (cfg.theorem == limits::TheoremId::GRO3 ||
                            cfg.theorem == limits::TheoremId::RTOP3)) {
      const double scale =
          limits::sandwich_scale(cfg.theorem, n, row.b_n, theorem_params(cfg, n));
      for (double& w : widths) w /= scale;
      row.median_sandwich_width = detail::median_of(std::move(widths));
    }
    row.median_kkt = detail::median_of(std::move(kkts));
    summary.rows.push_back(row);
    summary.references.emplace(n, std::move(ref));
  }
  return summary;
}

/// Run the full campaign: one record per (n, trial), trial-level parallelism
/// with deterministic slot assignment, then the summary.
inline std::pair<std::vector<TrialRecord>, Summary> run_experiment(
    const ExperimentConfig& cfg) {
  validate(cfg);
  const auto law = law_for(cfg);
  const std::size_t total = cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  const std::size_t workers = detail::worker_count(total);
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const std::uint64_t n = cfg.n_grid[i / cfg.trials];
      const std::uint64_t t = i % cfg.trials;
      records[i] = run_trial(cfg, law, n, t);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  auto summary = summarize(records, cfg);
  return {std::move(records), std::move(summary)};
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline void emit_records(const std::vector<TrialRecord>& records,
                         std::ostream& os) {
  for (const auto& rec : records) os << to_json(rec).dump() << '\n';
}

inline void emit_records(const std::vector<TrialRecord>& records,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open records file '" + path + "' for writing");
  emit_records(records, os);
  if (!os) throw io_error("failed writing records file '" + path + "'");
}

inline std::vector<TrialRecord> load_records(std::istream& is) {
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw io_error(std::string("bad records line: ") + e.what());
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

inline std::vector<TrialRecord> load_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open records file '" + path + "'");
  return load_records(is);
}

inline void emit_summary(const Summary& summary, std::ostream& os) {
  os << "n,trials,failures,b_n,ks,q05,q25,q50,q75,q95,median_gap,"
        "median_sandwich_width,median_kkt\n";
  for (const auto& row : summary.rows) {
    os << row.n << ',' << row.trials << ',' << row.failures << ','
       << mat::detail::format_double(row.b_n) << ','
       << mat::detail::format_double(row.ks) << ','
       << mat::detail::format_double(row.q05) << ','
       << mat::detail::format_double(row.q25) << ','
       << mat::detail::format_double(row.q50) << ','
       << mat::detail::format_double(row.q75) << ','
       << mat::detail::format_double(row.q95) << ','
       << mat::detail::format_double(row.median_gap) << ','
       << mat::detail::format_double(row.median_sandwich_width) << ','
       << mat::detail::format_double(row.median_kkt) << '\n';
  }
}

inline void emit_summary(const Summary& summary, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open summary file '" + path + "' for writing");
  emit_summary(summary, os);
  if (!os) throw io_error("failed writing summary file '" + path + "'");
}

/// CSV of (n, x, empirical_cdf, reference_cdf) rows at the sorted normalized
/// statistics of finished trials; both cdf columns are nondecreasing in x
/// within each n block.
inline void emit_plotdata(
    const std::vector<TrialRecord>& records,
    const std::map<std::uint64_t, limits::ReferenceDistribution>& reference,
    std::ostream& os) {
  os << "n,x,empirical_cdf,reference_cdf\n";
  std::map<std::uint64_t, std::vector<double>> by_n;
  for (const auto& rec : records)
    if (rec.status == "ok" && !std::isnan(rec.normalized_statistic))
      by_n[rec.n].push_back(rec.normalized_statistic);
  for (auto& [n, xs] : by_n) {
    std::sort(xs.begin(), xs.end());
    const auto ref = reference.find(n);
    if (ref == reference.end())
      throw invalid_law("plotdata: no reference for n=" + std::to_string(n));
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      os << n << ',' << mat::detail::format_double(xs[i]) << ','
         << mat::detail::format_double(static_cast<double>(i + 1) / m) << ','
         << mat::detail::format_double(ref->second.cdf(xs[i])) << '\n';
  }
}

inline void emit_plotdata(
    const std::vector<TrialRecord>& records,
    const std::map<std::uint64_t, limits::ReferenceDistribution>& reference,
    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open plotdata file '" + path + "' for writing");
  emit_plotdata(records, reference, os);
  if (!os) throw io_error("failed writing plotdata file '" + path + "'");
}

}  // namespace htlab::xlab
