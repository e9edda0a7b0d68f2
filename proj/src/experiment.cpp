#include "upress/experiment.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

namespace upress {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParameterOutOfRange:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotProbability:
      return ExitCode::Usage;
    case ErrorCode::Io:
      return ExitCode::Internal;
    case ErrorCode::CheckFailed:
      return ExitCode::CheckFailed;
    case ErrorCode::UnderResolved:
    case ErrorCode::Radius:
    case ErrorCode::Depth:
    case ErrorCode::NoConvergence:
    case ErrorCode::FrameNotReady:
    case ErrorCode::UnsupportedStructure:
    case ErrorCode::Unsupported:
    case ErrorCode::TooLarge:
      return ExitCode::Refused;
  }
  return ExitCode::Internal;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Finite doubles only; infinities become null in JSON.
json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Writer {
  fs::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& body) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << body;
    out.close();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
    files.push_back(path.string());
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
};

json header(const std::string& command, const RunConfig& config) {
  json j = json::object();
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = json::parse(config_to_json_text(config));
  return j;
}

}  // namespace

void write_error_report(const std::string& dir, const std::string& command, ExitCode code, const std::string& reason,
                        const std::string& message) {
  json err = json::object();
  err["schema_version"] = kSchemaVersion;
  err["command"] = command;
  err["status"] = "error";
  err["exit_code"] = static_cast<int>(code);
  err["reason"] = reason;
  err["message"] = message;
  Writer{fs::path(dir), {}}.write_json("error.json", err);
}

namespace {

/// Runs body; every failure becomes error.json in the output directory and a typed outcome.
RunOutcome guarded(const std::string& command, const RunConfig& config,
                   const std::function<void(Writer&, RunOutcome&)>& body) {
  Writer w{fs::path(config.output_dir), {}};
  RunOutcome out;
  try {
    body(w, out);
    out.files = w.files;
    return out;
  } catch (const Error& e) {
    out.code = exit_code_for(e.code());
    out.reason = std::string(reason(e.code()));
    out.message = e.what();
  } catch (const std::exception& e) {
    out.code = ExitCode::Internal;
    out.reason = "internal";
    out.message = e.what();
  }
  out.estimate.reset();
  out.files = w.files;
  if (out.reason != "io") {
    try {
      write_error_report(config.output_dir, command, out.code, out.reason, out.message);
      out.files.push_back((fs::path(config.output_dir) / "error.json").string());
    } catch (const std::exception&) {
      // Reported through the outcome only.
    }
  }
  return out;
}

std::string table_csv(const PressureTable& table) {
  std::string out = "schema_version,n,epsilon,m,logP,logQ,logGreedy\n";
  for (const auto& r : table.rows)
    out += fmt::format("{},{},{},{},{},{},{}\n", kSchemaVersion, r.n, num(r.epsilon), r.m, num(r.log_p), num(r.log_q),
                       num(r.log_greedy));
  return out;
}

json estimate_json(const PressureEstimate& e) {
  json j = json::object();
  j["value"] = opt(e.value);
  j["spanning"] = opt(e.spanning);
  j["resolved"] = e.resolved;
  j["epsilon_monotone"] = e.epsilon_monotone;
  j["diagnostic"] = e.diagnostic;
  json per = json::array();
  for (const auto& g : e.per_epsilon) {
    per.push_back({{"epsilon", g.epsilon},
                   {"value", opt(g.value)},
                   {"spanning", opt(g.spanning)},
                   {"differences", g.differences}});
  }
  j["per_epsilon"] = per;
  return j;
}

/// Exact consequences of DP optimality on one table, plus the half-epsilon domination audit.
json row_audit(const PressureTable& table, bool& hard_pass) {
  double greedy_over_p = -std::numeric_limits<double>::infinity();
  double q_over_spanning = -std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows) {
    greedy_over_p = std::max(greedy_over_p, r.log_greedy - r.log_p);
    q_over_spanning = std::max(q_over_spanning, r.log_q - r.log_greedy_spanning);
  }
  double half = -std::numeric_limits<double>::infinity();
  int pairs = 0;
  for (const auto& a : table.rows)
    for (const auto& b : table.rows)
      if (a.n == b.n && std::abs(b.epsilon - a.epsilon / 2.0) < 1e-15) {
        half = std::max(half, a.log_p - b.log_q);
        ++pairs;
      }
  hard_pass = greedy_over_p <= kExactTol && q_over_spanning <= kExactTol;
  json j = json::object();
  j["greedy_minus_p_max"] = finite(greedy_over_p);
  j["q_minus_greedy_spanning_max"] = finite(q_over_spanning);
  j["half_epsilon_pairs"] = pairs;
  j["p_minus_q_half_max"] = finite(half);
  j["pass"] = hard_pass;
  return j;
}

struct Problem {
  TorusSystem sys;
  PotentialSeq g;
  TorusPoint x;
};

Problem setup(const RunConfig& config) {
  validate_config(config);
  return {make_system(config.system), make_potential(config.potential), make_base_point(config)};
}

double require_value(const PressureEstimate& e, const char* what) {
  if (!e.value) throw Error(ErrorCode::UnderResolved, std::string(what) + ": table does not support an estimate");
  return *e.value;
}

TorusPoint shifted_base(const TorusPoint& x) {
  Vec v = x.coords();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 0.25 + 0.1 * static_cast<double>(i);
  return TorusPoint(v);
}

}  // namespace

std::vector<MeasureEntry> build_registry(const TorusSystem& sys, const VerifySpec& verify, std::uint64_t seed) {
  std::vector<MeasureEntry> out;
  for (const auto& name : verify.registry) {
    if (name == "haar") {
      out.push_back(haar_measure(sys, verify.haar_samples, seed));
    } else if (name == "fixed-point") {
      if (!sys.is_linear())
        throw Error(ErrorCode::Unsupported, "fixed-point measures are only registered for linear systems");
      auto reg = default_registry(sys, verify.haar_samples, seed);
      out.push_back(reg.back());
    } else {
      throw Error(ErrorCode::Config, "verify.registry: unknown measure '" + name + "'");
    }
  }
  return out;
}

OracleRun oracle_suite(const TorusSystem& sys, const TorusPoint& x, double delta, int instances, int max_m,
                       std::uint64_t seed) {
  if (instances < 1 || max_m < 1 || max_m > static_cast<int>(kBruteForceLimit))
    throw Error(ErrorCode::InvalidArgument, "oracle needs instances >= 1 and 1 <= max_m <= 20");
  constexpr int kDepths = 4;
  const auto chart = build_leaf_chart(sys, x, delta);
  std::vector<BowenDistanceEvaluator> evaluators;
  for (int n = 1; n <= kDepths; ++n) evaluators.emplace_back(sys, chart, n);

  OracleRun run;
  run.instances = instances;
  for (int i = 0; i < instances; ++i) {
    auto rng = item_rng(seed, static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<int> pick_m(1, max_m), pick_n(1, kDepths), coin(0, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto m = static_cast<std::size_t>(pick_m(rng));
    const auto& ev = evaluators[static_cast<std::size_t>(pick_n(rng) - 1)];
    const double eps = (0.2 + 1.8 * unit(rng)) * 4.0 * ev.pushed_length() / static_cast<double>(m);

    std::vector<double> params(m);
    if (coin(rng) == 0 && ev.is_linear()) {
      // Lattice with spacing eps / (k lambda^{n-1}): many pairs sit exactly on the boundary.
      const double step = eps / (std::pow(ev.rate(), ev.depth() - 1) * (1.0 + coin(rng)));
      const double start = -delta + step * std::floor(unit(rng) * 4.0);
      for (std::size_t k = 0; k < m; ++k) params[k] = std::min(delta, start + step * static_cast<double>(k));
      params.erase(std::unique(params.begin(), params.end()), params.end());
    } else {
      for (auto& p : params) p = -delta + 2.0 * delta * unit(rng);
      std::sort(params.begin(), params.end());
      params.erase(std::unique(params.begin(), params.end()), params.end());
    }
    std::vector<double> w(params.size());
    for (auto& v : w) v = coin(rng) == 0 ? std::floor(unit(rng) * 3.0) : -3.0 + 6.0 * unit(rng);

    const auto cs = build_conflicts(ev, params, eps, 0);
    const auto dp = max_weight_separated_dp(cs, w);
    const auto bp = brute_force_oracle(cs, w, OracleMode::Packing);
    const auto sup = ball_sup(cs, w);
    const auto dc = min_weight_spanning_dp(cs, sup);
    const auto bc = brute_force_oracle(cs, sup, OracleMode::Covering);
    const auto gr = greedy_max_separated(cs, w);
    const double dpack = std::abs(dp.log_total - bp.log_total);
    const double dcov = std::abs(dc.log_total - bc.log_total);
    if (dpack > kExactTol) ++run.packing_mismatches;
    if (dcov > kExactTol) ++run.covering_mismatches;
    if (gr.log_total > dp.log_total + kExactTol) ++run.greedy_above_dp;
    run.max_defect = std::max({run.max_defect, dpack, dcov});
  }
  run.pass = run.packing_mismatches == 0 && run.covering_mismatches == 0 && run.greedy_above_dp == 0;
  return run;
}

RunOutcome run_estimate(const RunConfig& config) {
  return guarded("estimate", config, [&](Writer& w, RunOutcome& out) {
    const auto pb = setup(config);
    const auto params = config.pressure;
    const auto table = pressure_table(pb.sys, pb.g, pb.x, params);
    const auto est = estimate_pressure(table);

    json report = header("estimate", config);
    report["status"] = "ok";
    report["system"] = {{"name", pb.sys.name()},
                        {"linear", pb.sys.is_linear()},
                        {"unstable_rate", pb.sys.unstable_rate()},
                        {"cone_load", pb.sys.cone_load()},
                        {"cone_threshold", pb.sys.cone_threshold()}};
    report["potential"] = pb.g.describe();
    report["rows"] = table.rows.size();
    report["estimate"] = estimate_json(est);

    const auto analytic = analytic_pressure(pb.g, pb.sys);
    report["analytic"] = opt(analytic);
    report["analytic_residual"] = analytic && est.value ? json(std::abs(*est.value - *analytic)) : json(nullptr);

    bool rows_ok = false;
    report["row_audit"] = row_audit(table, rows_ok);

    // The same estimate from a second base point, at the finest epsilon only.
    PressureParams second = params;
    second.epsilons = {*std::min_element(params.epsilons.begin(), params.epsilons.end())};
    const auto y = shifted_base(pb.x);
    const auto other = estimate_pressure(pressure_table(pb.sys, pb.g, y, second));
    json base_check = json::object();
    base_check["base_point"] = std::vector<double>(y.coords().data(), y.coords().data() + y.dim());
    base_check["value"] = opt(other.value);
    base_check["difference"] = other.value && est.value ? json(std::abs(*other.value - *est.value)) : json(nullptr);
    report["base_point_check"] = base_check;

    const auto chart = build_leaf_chart(pb.sys, pb.x, params.delta, params.graph_iterations);
    const auto comp = estimate_comparability_constant(pb.sys, chart, 2000);
    report["chart"] = {{"kind", chart.kind() == ChartKind::ExactLinear ? "exact-linear" : "graph-transform"},
                       {"residual", chart.residual()},
                       {"residual_history", chart.residual_history()},
                       {"decay_rate", opt(residual_decay_rate(chart.residual_history()))},
                       {"comparability_constant", comp.constant},
                       {"comparability_min_ratio", comp.min_ratio},
                       {"comparability_lower_bound", comp.lower_bound_holds}};

    w.write("table.csv", table_csv(table));
    w.write_json("report.json", report);
    out.estimate = est.value;
    if (!rows_ok) {
      out.code = ExitCode::CheckFailed;
      out.reason = std::string(reason(ErrorCode::CheckFailed));
      out.message = "table rows violate DP optimality";
    }
  });
}

RunOutcome run_verify(const RunConfig& config) {
  return guarded("verify", config, [&](Writer& w, RunOutcome& out) {
    const auto pb = setup(config);
    const auto& v = config.verify;
    const auto params = config.pressure;
    json cert = header("verify", config);
    json hard = json::array();
    bool all_hard = true;
    auto hard_check = [&](const std::string& name, bool pass) {
      hard.push_back({{"name", name}, {"pass", pass}});
      all_hard = all_hard && pass;
    };

    std::optional<PressureTable> table;
    std::optional<double> estimate;
    auto base_estimate = [&]() {
      if (!estimate) {
        table = pressure_table(pb.sys, pb.g, pb.x, params);
        estimate = require_value(estimate_pressure(*table), "potential");
      }
      return *estimate;
    };

    if (v.variational) {
      const double p = base_estimate();
      bool rows_ok = false;
      cert["row_audit"] = row_audit(*table, rows_ok);
      hard_check("dp-optimality-rows", rows_ok);

      const auto registry = build_registry(pb.sys, v, config.seed);
      if (std::none_of(registry.begin(), registry.end(), [](const auto& m) { return m.certified(); }))
        throw Error(ErrorCode::Unsupported, "no registry measure has a certified unstable entropy");
      const auto rep =
          variational_certificate(pb.sys, pb.g, registry, p, v.lyapunov_stages, config.tolerance, params.jobs);
      json cands = json::array();
      for (const auto& c : rep.candidates) {
        json stages = json::array();
        for (const auto& [n, val] : c.lyapunov.stages) stages.push_back({{"n", n}, {"mean", val}});
        cands.push_back({{"measure", c.measure.description},
                         {"kind", std::string(measure_kind_name(c.measure.kind))},
                         {"hu", c.measure.hu},
                         {"hu_provenance", std::string(provenance_name(c.measure.provenance))},
                         {"certified", c.certified},
                         {"g_plus", c.lyapunov.minus_infinity ? json("-inf") : json(c.lyapunov.value)},
                         {"g_plus_stderr", c.lyapunov.stderr_},
                         {"g_plus_analytic", opt(c.lyapunov.analytic)},
                         {"stages", stages},
                         {"sum", opt(c.sum)}});
      }
      cert["variational"] = {{"pressure_estimate", rep.pressure_estimate},
                             {"analytic_pressure", opt(analytic_pressure(pb.g, pb.sys))},
                             {"best_sum", opt(rep.best_sum)},
                             {"gap", rep.gap},
                             {"tolerance", rep.tolerance},
                             {"verdict", std::string(verdict_name(rep.verdict))},
                             {"one_sided_safe", rep.one_sided_safe},
                             {"candidates", cands}};
      hard_check("one-sided-safety", rep.one_sided_safe);
    }

    if (v.properties) {
      const auto h = make_potential(v.property_h);
      const auto rep = check_properties(pb.sys, pb.g, h, v.shift_c, v.convex_p, pb.x, params, config.tolerance);
      json items = json::array();
      bool exact_ok = true;
      for (const auto& it : rep.items) {
        items.push_back({{"item", it.item},
                         {"name", it.name},
                         {"level", it.level},
                         {"supported", it.supported},
                         {"pass", it.pass},
                         {"defect", it.defect},
                         {"tolerance", it.tolerance},
                         {"note", it.note}});
        if (it.level == "row" && !it.pass) exact_ok = false;
      }
      cert["properties"] = {{"h", h.describe()}, {"pass", rep.pass}, {"items", items}};
      hard_check("exact-row-identities", exact_ok);
    }

    if (v.power_rule) {
      const auto rep = power_rule_check(pb.sys, pb.g, v.power_k, pb.x, params, config.tolerance);
      cert["power_rule"] = {{"k", rep.k},
                            {"estimate_1", rep.estimate_1},
                            {"estimate_k", rep.estimate_k},
                            {"defect", rep.defect},
                            {"tolerance", rep.tolerance},
                            {"n_max_k", rep.n_max_k},
                            {"hu_1", rep.hu_1},
                            {"hu_k", rep.hu_k},
                            {"hu_defect", rep.hu_defect},
                            {"pass", rep.pass}};
    }

    if (v.stage_limit) {
      const auto rep = stage_limit_check(pb.sys, pb.g, v.stages, pb.x, params);
      cert["stage_limit"] = {{"stages", rep.stages},
                             {"values", rep.values},
                             {"estimate", rep.estimate},
                             {"analytic", opt(rep.analytic)},
                             {"tolerance", rep.tolerance},
                             {"worst_below", rep.worst_below},
                             {"worst_increase", finite(rep.worst_increase)},
                             {"last_gap", opt(rep.last_gap)},
                             {"above_estimate", rep.above_estimate},
                             {"doubling_nonincreasing", rep.doubling_nonincreasing},
                             {"last_close", rep.last_close},
                             {"full_sequence_nonincreasing", rep.full_sequence_nonincreasing},
                             {"pass", rep.pass}};
    }

    if (v.cover) {
      const double p = base_estimate();
      const auto chart = build_leaf_chart(pb.sys, pb.x, params.delta, params.graph_iterations);
      json runs = json::array();
      bool sub_ok = true;
      for (double eps : v.cover_epsilons) {
        const auto rep = cover_pressure_small(pb.sys, chart, pb.g, uniform_cover(params.delta, 2.0 * eps),
                                              v.cover_n_max, params.density_factor, params.lift_budget, params.jobs);
        runs.push_back({{"epsilon", eps},
                        {"interval_length", 2.0 * eps},
                        {"m", rep.m},
                        {"log_p", rep.log_p},
                        {"join_sizes", rep.join_sizes},
                        {"max_defect", rep.max_defect},
                        {"subadditive", rep.subadditive},
                        {"fekete_bound", rep.fekete_bound},
                        {"fekete_above_estimate", rep.fekete_bound >= p - kEpsilonNoise}});
        sub_ok = sub_ok && rep.subadditive;
      }
      cert["cover"] = {{"packing_estimate", p}, {"runs", runs}};
      hard_check("cover-subadditivity", sub_ok);
    }

    if (v.oracle) {
      const auto run =
          oracle_suite(pb.sys, pb.x, params.delta, config.oracle.instances, config.oracle.max_m, config.seed);
      cert["oracle"] = {{"instances", run.instances},
                        {"max_m", config.oracle.max_m},
                        {"packing_mismatches", run.packing_mismatches},
                        {"covering_mismatches", run.covering_mismatches},
                        {"greedy_above_dp", run.greedy_above_dp},
                        {"max_defect", run.max_defect},
                        {"pass", run.pass}};
      hard_check("dp-oracle", run.pass);
    }

    cert["hard_checks"] = hard;
    cert["status"] = all_hard ? "ok" : "check-failed";
    w.write_json("certificate.json", cert);
    if (!all_hard) {
      out.code = ExitCode::CheckFailed;
      out.reason = std::string(reason(ErrorCode::CheckFailed));
      out.message = "a hard invariant failed; see certificate.json";
    }
  });
}

RunOutcome run_sweep(const RunConfig& config) {
  return guarded("sweep", config, [&](Writer& w, RunOutcome&) {
    validate_config(config);
    if (config.sweep.values.empty()) throw Error(ErrorCode::Config, "sweep.values: must not be empty");
    const auto& axis = config.sweep.axis;
    if (axis == "exponent" && config.potential.kind != "cocycle_norm")
      throw Error(ErrorCode::Config, "sweep.axis: exponent sweeps need potential.kind cocycle_norm");
    if (axis == "magnitude" && config.system.perturbation.empty())
      throw Error(ErrorCode::Config, "sweep.axis: magnitude sweeps need a perturbation table");

    std::string csv = "schema_version,axis,value,estimate,spanning,analytic,residual,resolved\n";
    json runs = json::array();
    std::optional<double> lo, hi, worst_residual;
    for (std::size_t i = 0; i < config.sweep.values.size(); ++i) {
      const double value = config.sweep.values[i];
      RunConfig c = config;
      if (axis == "epsilon") c.pressure.epsilons = {value};
      if (axis == "delta") c.pressure.delta = value;
      if (axis == "n") {
        if (std::floor(value) != value) throw Error(ErrorCode::Config, fmt::format("sweep.values[{}]: n must be an integer", i));
        c.pressure.n_max = static_cast<int>(value);
      }
      if (axis == "magnitude") c.system.magnitude = value;
      if (axis == "exponent") c.potential.value = value;
      const auto pb = setup(c);
      const auto est = estimate_pressure(pressure_table(pb.sys, pb.g, pb.x, c.pressure));
      const auto analytic = analytic_pressure(pb.g, pb.sys);
      std::optional<double> residual;
      if (analytic && est.value) residual = std::abs(*est.value - *analytic);
      if (est.value) {
        lo = lo ? std::min(*lo, *est.value) : *est.value;
        hi = hi ? std::max(*hi, *est.value) : *est.value;
      }
      if (residual) worst_residual = worst_residual ? std::max(*worst_residual, *residual) : *residual;
      auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
      csv += fmt::format("{},{},{},{},{},{},{},{}\n", kSchemaVersion, csv_field(axis), num(value), cell(est.value),
                         cell(est.spanning), cell(analytic), cell(residual), est.resolved ? "true" : "false");
      runs.push_back({{"value", value},
                      {"estimate", opt(est.value)},
                      {"spanning", opt(est.spanning)},
                      {"analytic", opt(analytic)},
                      {"residual", opt(residual)},
                      {"resolved", est.resolved}});
    }
    json summary = header("sweep", config);
    summary["status"] = "ok";
    summary["axis"] = axis;
    summary["runs"] = runs;
    summary["spread"] = lo && hi ? json(*hi - *lo) : json(nullptr);
    summary["max_analytic_residual"] = opt(worst_residual);
    w.write("sweep.csv", csv);
    w.write_json("sweep.json", summary);
  });
}

RunOutcome run_oracle(const RunConfig& config) {
  return guarded("oracle", config, [&](Writer& w, RunOutcome& out) {
    const auto pb = setup(config);
    const auto run = oracle_suite(pb.sys, pb.x, config.pressure.delta, config.oracle.instances, config.oracle.max_m,
                                  config.seed);
    json rep = header("oracle", config);
    rep["status"] = run.pass ? "ok" : "check-failed";
    rep["instances"] = run.instances;
    rep["max_m"] = config.oracle.max_m;
    rep["packing_mismatches"] = run.packing_mismatches;
    rep["covering_mismatches"] = run.covering_mismatches;
    rep["greedy_above_dp"] = run.greedy_above_dp;
    rep["max_defect"] = run.max_defect;
    rep["tolerance"] = kExactTol;
    rep["pass"] = run.pass;
    w.write_json("oracle.json", rep);
    if (!run.pass) {
      out.code = ExitCode::CheckFailed;
      out.reason = std::string(reason(ErrorCode::CheckFailed));
      out.message = "DP totals differ from exhaustive enumeration";
    }
  });
}

}  // namespace upress
