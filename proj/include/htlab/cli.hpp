#pragma once

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "htlab/experiment.hpp"

namespace htlab::xlab {

inline json certificate_json(const norms::NormCertificate& cert) {
  json j;
  j["value"] = cert.value;
  j["method"] = norms::method_name(cert.method);
  j["kkt_residual"] = detail::real_or_null(cert.kkt_residual);
  j["iterations"] = cert.iterations;
  j["restarts"] = cert.restarts;
  j["smoothing_rel_bound"] = cert.smoothing_rel_bound;
  j["x"] = cert.x;
  j["y"] = cert.y;
  return j;
}

inline json typicality_json(const mat::TypicalityReport& rep) {
  json j;
  j["max_abs"] = {{"value", rep.max_abs.value}, {"i", rep.max_abs.i}, {"j", rep.max_abs.j}};
  j["diag_exceed_count"] = rep.diag_exceed_count;
  j["rows_with_two_big"] = rep.rows_with_two_big;
  j["max_truncated_row_sum"] = rep.max_truncated_row_sum;
  j["row_sum_ratio"] = rep.row_sum_ratio;
  j["kappa_observed"] = rep.kappa_observed;
  j["large_count"] = rep.large_count;
  j["b_n"] = rep.b_n;
  j["t_low"] = rep.t_low;
  j["t_high"] = rep.t_high;
  j["delta"] = rep.delta;
  return j;
}

namespace detail {

inline dist::SvFamily family_from(const std::string& s) {
  if (s == "constant") return dist::SvFamily::constant;
  if (s == "log_power") return dist::SvFamily::log_power;
  throw config_error("unknown family '" + s + "'");
}

inline dist::SignMode sign_from(const std::string& s) {
  if (s == "symmetric") return dist::SignMode::symmetric;
  if (s == "positive") return dist::SignMode::positive;
  if (s == "two_point") return dist::SignMode::two_point;
  throw config_error("unknown sign mode '" + s + "'");
}

/// Reconstruct enough of a config from a records file for `report` to
/// rebuild references and summaries.
inline ExperimentConfig config_from_records(const std::vector<TrialRecord>& records,
                                            std::size_t reference_size,
                                            std::uint64_t seed) {
  if (records.empty()) throw io_error("records file holds no trials");
  const auto& rec = records.front();
  ExperimentConfig cfg;
  cfg.theorem = rec.theorem;
  cfg.alpha = rec.params.alpha;
  cfg.r = rec.params.r;
  cfg.p = rec.params.p;
  cfg.mu = rec.params.mu;
  cfg.family = family_from(rec.params.family);
  cfg.log_c = rec.params.log_c;
  cfg.sign = sign_from(rec.params.sign);
  cfg.sign_q = rec.params.sign_q;
  cfg.reference_size = reference_size;
  cfg.master_seed = seed;
  return cfg;
}

struct ExponentOption {
  std::string text = "2";
  double value(const char* key) const { return parse_real(key, text); }
};

}  // namespace detail

/// Command-line front end. `args` holds the arguments in natural order,
/// program name excluded. Exit codes: 0 success, 2 usage, 3 domain/regime
/// refusal, 4 I/O failure.
inline int cli(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"numerical laboratory for heavy-tailed random matrices"};
  app.require_subcommand(1);

  // --- sample ---------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw a random symmetric matrix");
  struct {
    double alpha = 1.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 1;
    std::string family = "constant";
    double log_c = 1.0;
    std::string sign = "symmetric";
    double sign_q = 0.5;
    bool centered = false;
    double shift = 0.0;
    std::string out;
  } smp;
  sample->add_option("--alpha", smp.alpha, "tail index in (0, 2)")->required();
  sample->add_option("--n", smp.n, "matrix order")->required();
  sample->add_option("--seed", smp.seed, "stream seed");
  sample->add_option("--family", smp.family, "constant | log_power");
  sample->add_option("--log-c", smp.log_c, "log-family slope c > 0");
  sample->add_option("--sign", smp.sign, "symmetric | positive | two_point");
  sample->add_option("--sign-q", smp.sign_q, "P(sign = +1) for two_point");
  sample->add_flag("--centered", smp.centered, "subtract the magnitude mean");
  sample->add_option("--shift", smp.shift, "constant added to every entry");
  sample->add_option("--out", smp.out, "output matrix file")->required();
  sample->callback([&] {
    dist::HeavyTailLaw law;
    law.alpha = smp.alpha;
    law.family = detail::family_from(smp.family);
    law.log_c = smp.log_c;
    law.sign = detail::sign_from(smp.sign);
    law.sign_q = smp.sign_q;
    law.centered = smp.centered;
    law.shift = smp.shift;
    if (smp.n == 0) throw invalid_law("matrix order must be at least 1");
    Rng rng(smp.seed);
    auto a = mat::sample_matrix(law, static_cast<std::size_t>(smp.n), rng);
    a.set_seed(smp.seed);
    mat::save_matrix(smp.out, a);
  });

  // --- decompose ------------------------------------------------------
  auto* dec = app.add_subcommand("decompose",
                                 "split a matrix into small/intermediate/large parts");
  struct {
    std::string in, regime = "small_alpha", out_prefix;
    double alpha = 1.0, delta = 0.1;
    detail::ExponentOption r{"4"}, p{"2"};
    double eta = -1.0, zeta = -1.0;
  } dcp;
  dec->add_option("--in", dcp.in, "matrix file")->required();
  dec->add_option("--alpha", dcp.alpha, "tail index in (0, 2)")->required();
  dec->add_option("--regime", dcp.regime, "small_alpha | centered_alpha");
  dec->add_option("--r", dcp.r.text, "target exponent r (for default thresholds)");
  dec->add_option("--p", dcp.p.text, "target exponent p (for default thresholds)");
  dec->add_option("--eta", dcp.eta, "threshold exponent override");
  dec->add_option("--zeta", dcp.zeta, "threshold exponent override");
  dec->add_option("--delta", dcp.delta, "big-entry margin for diagnostics");
  dec->add_option("--out-prefix", dcp.out_prefix, "part file prefix")->required();
  dec->callback([&] {
    const auto a = mat::load_matrix(dcp.in);
    double eta = dcp.eta, zeta = dcp.zeta;
    if (eta < 0.0 || zeta < 0.0) {
      mat::Regime regime;
      if (dcp.regime == "small_alpha")
        regime = mat::Regime::small_alpha;
      else if (dcp.regime == "centered_alpha")
        regime = mat::Regime::centered_alpha;
      else
        throw config_error("unknown regime '" + dcp.regime + "'");
      const auto th = mat::default_thresholds(regime, dcp.alpha,
                                              dcp.r.value("r"), dcp.p.value("p"));
      eta = th.eta;
      zeta = th.zeta;
    }
    const auto parts = mat::decompose(a, dcp.alpha, eta, zeta);
    mat::save_matrix(dcp.out_prefix + ".small.mat", parts.small);
    mat::save_sparse(dcp.out_prefix + ".inter.sparse", parts.inter);
    mat::save_sparse(dcp.out_prefix + ".large.sparse", parts.large);
    const auto rep = mat::diagnostics(a, dcp.alpha, dcp.delta, eta, zeta);
    out << typicality_json(rep).dump(2) << '\n';
  });

  // --- norm -----------------------------------------------------------
  auto* nrm = app.add_subcommand("norm", "r -> p operator norm certificate");
  struct {
    std::string in, method = "auto";
    detail::ExponentOption r, p;
    int restarts = 50;
    double tol = 1e-12;
    int max_iter = 10000;
    std::uint64_t seed = 1;
  } nmo;
  nrm->add_option("--in", nmo.in, "matrix file")->required();
  nrm->add_option("--r", nmo.r.text, "domain exponent in [1, inf]")->required();
  nrm->add_option("--p", nmo.p.text, "range exponent in [1, inf]")->required();
  nrm->add_option("--method", nmo.method, "auto | ascent | power | eigen | oracle");
  nrm->add_option("--restarts", nmo.restarts, "ascent restarts");
  nrm->add_option("--tol", nmo.tol, "relative tolerance");
  nrm->add_option("--max-iter", nmo.max_iter, "iteration cap");
  nrm->add_option("--seed", nmo.seed, "restart stream seed");
  nrm->callback([&] {
    const auto a = mat::load_matrix(nmo.in);
    const norms::NormProblem prob(nmo.r.value("r"), nmo.p.value("p"));
    norms::SolveOptions opts;
    opts.restarts = nmo.restarts;
    opts.tol = nmo.tol;
    opts.max_iter = nmo.max_iter;
    Rng rng(nmo.seed);
    norms::NormCertificate cert;
    if (nmo.method == "auto")
      cert = solve_norm_auto(a, prob, opts, rng);
    else if (nmo.method == "ascent")
      cert = norms::multistart_ascent(a, prob, opts, rng);
    else if (nmo.method == "power")
      cert = norms::boyd_power_method(a, prob, opts);
    else if (nmo.method == "eigen") {
      if (!(prob.r == 2.0 && prob.p == 2.0))
        throw unsupported_regime("eigen method needs r = p = 2");
      cert = norms::eigen_norm(a);
    } else if (nmo.method == "oracle")
      cert = norms::oracle_norm_small(a, prob, rng);
    else
      throw config_error("unknown method '" + nmo.method + "'");
    out << certificate_json(cert).dump(2) << '\n';
  });

  // --- groth ----------------------------------------------------------
  auto* gro = app.add_subcommand("groth", "quadratic-form maximum over the l_r ball");
  struct {
    std::string in;
    detail::ExponentOption r;
    int restarts = 50;
    double tol = 1e-12;
    int max_iter = 10000;
    std::uint64_t seed = 1;
  } gmo;
  gro->add_option("--in", gmo.in, "matrix file")->required();
  gro->add_option("--r", gmo.r.text, "ball exponent in [1, inf]")->required();
  gro->add_option("--restarts", gmo.restarts, "ascent restarts");
  gro->add_option("--tol", gmo.tol, "relative tolerance");
  gro->add_option("--max-iter", gmo.max_iter, "iteration cap");
  gro->add_option("--seed", gmo.seed, "restart stream seed");
  gro->callback([&] {
    const auto a = mat::load_matrix(gmo.in);
    norms::SolveOptions opts;
    opts.restarts = gmo.restarts;
    opts.tol = gmo.tol;
    opts.max_iter = gmo.max_iter;
    Rng rng(gmo.seed);
    const auto cert = norms::grothendieck_value(a, gmo.r.value("r"), opts, rng);
    out << certificate_json(cert).dump(2) << '\n';
  });

  // --- ground ---------------------------------------------------------
  auto* gnd = app.add_subcommand("ground", "exact sign-vector ground state");
  struct {
    std::string in;
  } gmo2;
  gnd->add_option("--in", gmo2.in, "matrix file")->required();
  gnd->callback([&] {
    const auto a = mat::load_matrix(gmo2.in);
    const auto gs = norms::ground_state(a);
    json j;
    j["value"] = gs.value;
    j["x"] = gs.x;
    out << j.dump(2) << '\n';
  });

  // --- experiment -----------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "run a Monte Carlo campaign");
  struct {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_given = false;
  } xmo;
  exp->add_option("--config", xmo.config, "flat key=value config file")->required();
  exp->add_option("--seed", xmo.seed, "override master_seed")
      ->each([&](const std::string&) { xmo.seed_given = true; });
  exp->callback([&] {
    auto cfg = load_config(xmo.config);
    if (xmo.seed_given) cfg.master_seed = xmo.seed;
    auto [records, summary] = run_experiment(cfg);
    if (!cfg.records_path.empty()) emit_records(records, cfg.records_path);
    if (!cfg.summary_path.empty())
      emit_summary(summary, cfg.summary_path);
    else
      emit_summary(summary, out);
    if (!cfg.plotdata_path.empty())
      emit_plotdata(records, summary.references, cfg.plotdata_path);
  });

  // --- report ---------------------------------------------------------
  auto* rep = app.add_subcommand("report", "rebuild a summary from records");
  struct {
    std::string records, out_path;
    std::size_t reference_size = 2000;
    std::uint64_t seed = 1;
  } rmo;
  rep->add_option("--records", rmo.records, "JSON-lines records file")->required();
  rep->add_option("--reference-size", rmo.reference_size, "MC reference sample size");
  rep->add_option("--seed", rmo.seed, "reference stream seed");
  rep->add_option("--out", rmo.out_path, "summary CSV path (default: stdout)");
  rep->callback([&] {
    const auto records = load_records(rmo.records);
    const auto cfg =
        detail::config_from_records(records, rmo.reference_size, rmo.seed);
    const auto summary = summarize(records, cfg);
    if (rmo.out_path.empty())
      emit_summary(summary, out);
    else
      emit_summary(summary, rmo.out_path);
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const invalid_law& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const unsupported_regime& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const regime_violation& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const not_pairable& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const oracle_uncertain& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const size_refusal& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli(std::move(args));
}

}  // namespace htlab::xlab
