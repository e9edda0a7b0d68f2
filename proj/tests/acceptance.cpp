// One PASS/FAIL line per acceptance criterion; tolerances are pinned here, not read from configs.
#include "upress/cover.hpp"
#include "upress/experiment.hpp"
#include "upress/variational.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace upress;

namespace {

const double kLogLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);
const TorusPoint kBase{0.3, 0.2, 0.1};
const std::vector<double> kLine{-1.0, -0.5, 0.0, 0.5, 1.0};

constexpr double kEntropyRel = 0.02;
constexpr double kLineAbs = 0.03;
constexpr double kCertTol = 0.03;
constexpr double kRowTol = 1e-9;
constexpr double kGrowthTol = 0.02;
constexpr int kOracleInstances = 200;
constexpr int kOracleMaxM = 18;
constexpr double kShiftEstimate = 0.02;
constexpr double kPowerTol = 0.06;
constexpr double kStageMonotone = 0.02;
constexpr double kStageBelow = 0.02;
constexpr double kStageLast = 0.05;
constexpr int kLogSumTrials = 1000;
constexpr double kGibbsTol = 1e-12;
constexpr double kFeketeSlack = 0.02;
constexpr double kDeltaTol = 0.02;
constexpr double kGraphResidual = 1e-8;
constexpr double kComparability = 1.1;
constexpr double kPerturbShift = 0.05;
constexpr double kEntropySeconds = 30.0;

int failed = 0;

void report(int criterion, bool pass, const std::string& detail) {
  fmt::print("{} criterion {:>2}: {}\n", pass ? "PASS" : "FAIL", criterion, detail);
  std::fflush(stdout);
  if (!pass) ++failed;
}

/// Runs one criterion; a thrown error is a failure with its message.
void criterion(int number, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(number, false, fmt::format("error: {}", e.what()));
  }
}

PressureParams defaults(double delta = 0.1) {
  PressureParams p;
  p.delta = delta;
  p.epsilons = {0.04, 0.02, 0.01};
  p.n_min = 2;
  p.n_max = 8;
  return p;
}

double value_of(const PressureEstimate& e) {
  if (!e.value) throw Error(ErrorCode::UnderResolved, "table does not support an estimate");
  return *e.value;
}

TrigPolynomial cos_x1() { return cos_first_coordinate(3); }

}  // namespace

int main() {
  const auto f = cat_rotation();
  const auto p = defaults();

  // Shared tables for the cocycle line.
  std::vector<PressureTable> line_tables;
  std::vector<double> line_estimates;

  criterion(1, [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto e = estimate_pressure(pressure_table(f, PotentialSeq::constant(0.0), kBase, p));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double v = value_of(e);
    const double rel = std::abs(v - kLogLambda) / kLogLambda;
    report(1, rel <= kEntropyRel && secs < kEntropySeconds,
           fmt::format("entropy estimate {:.6f} vs log lambda {:.6f}, rel err {:.2e} <= {}, {:.2f} s < {} s", v,
                       kLogLambda, rel, kEntropyRel, secs, kEntropySeconds));
  });

  criterion(2, [&] {
    double worst = 0.0;
    for (double t : kLine) {
      line_tables.push_back(pressure_table(f, PotentialSeq::cocycle_norm(t), kBase, p));
      const double v = value_of(estimate_pressure(line_tables.back()));
      line_estimates.push_back(v);
      worst = std::max(worst, std::abs(v - (1.0 + t) * kLogLambda));
    }
    report(2, worst <= kLineAbs, fmt::format("cocycle line t in [-1, 1]: max residual {:.2e} <= {}", worst, kLineAbs));
  });

  criterion(3, [&] {
    if (line_estimates.size() != kLine.size()) throw Error(ErrorCode::CheckFailed, "criterion 2 tables missing");
    const auto registry = default_registry(f);
    bool all_equal = true, safe = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < kLine.size(); ++i) {
      const auto rep = variational_certificate(f, PotentialSeq::cocycle_norm(kLine[i]), registry, line_estimates[i],
                                               {2, 4, 8, 16}, kCertTol);
      all_equal = all_equal && rep.verdict == Verdict::CertifiedEqual;
      safe = safe && rep.one_sided_safe;
      for (const auto& c : rep.candidates)
        if (c.sum) safe = safe && *c.sum <= line_estimates[i] + kCertTol;
      if (rep.best_sum) worst = std::max(worst, std::abs(*rep.best_sum - line_estimates[i]));
      else all_equal = false;
    }
    report(3, all_equal && safe && worst <= kCertTol,
           fmt::format("registry {{haar, fixed point}}: certified-equal {}, max |best_sum - estimate| {:.2e} <= {}, "
                       "one-sided safe {}",
                       all_equal, worst, kCertTol, safe));
  });

  criterion(4, [&] {
    std::vector<PressureTable> tables = line_tables;
    tables.push_back(pressure_table(f, PotentialSeq::constant(0.0), kBase, p));
    double chain = -INFINITY, half = -INFINITY, growth = 0.0;
    std::size_t rows = 0;
    for (const auto& t : tables) {
      for (const auto& r : t.rows) {
        chain = std::max({chain, r.log_q - r.log_greedy, r.log_greedy - r.log_p});
        ++rows;
        for (const auto& s : t.rows)
          if (s.n == r.n && std::abs(s.epsilon - r.epsilon / 2.0) < 1e-15) half = std::max(half, r.log_p - s.log_q);
      }
      for (const auto& g : estimate_pressure(t).per_epsilon)
        if (g.value && g.spanning) growth = std::max(growth, std::abs(*g.value - *g.spanning));
    }
    report(4, chain <= kRowTol && half <= kRowTol && growth <= kGrowthTol,
           fmt::format("{} rows: max(logQ - logGreedy, logGreedy - logP) {:.2e}, max logP(eps) - logQ(eps/2) {:.2e}, "
                       "P/Q growth gap {:.2e} <= {}",
                       rows, chain, half, growth, kGrowthTol));
  });

  criterion(5, [&] {
    const auto run = oracle_suite(f, kBase, 0.1, kOracleInstances, kOracleMaxM, 1);
    report(5, run.pass && run.instances >= kOracleInstances && run.max_defect <= kRowTol,
           fmt::format("{} instances (m <= {}): packing mismatches {}, covering mismatches {}, max defect {:.2e}",
                       run.instances, kOracleMaxM, run.packing_mismatches, run.covering_mismatches, run.max_defect));
  });

  criterion(6, [&] {
    double row = 0.0, est = 0.0;
    for (const auto& g : {PotentialSeq::cocycle_norm(1.0), PotentialSeq::birkhoff(cos_x1())}) {
      for (double c : {0.5, -0.3}) {
        const auto tg = pressure_table(f, g, kBase, p);
        const auto ts = pressure_table(f, PotentialSeq::shift(c, g), kBase, p);
        for (std::size_t i = 0; i < tg.rows.size(); ++i)
          row = std::max(row, std::abs(ts.rows[i].log_p - tg.rows[i].log_p - tg.rows[i].n * c));
        est = std::max(est, std::abs(value_of(estimate_pressure(ts)) - value_of(estimate_pressure(tg)) - c));
      }
    }
    report(6, row <= kRowTol && est <= kShiftEstimate,
           fmt::format("row defect {:.2e} <= {}, estimate defect {:.2e} <= {}", row, kRowTol, est, kShiftEstimate));
  });

  criterion(7, [&] {
    double worst = 0.0;
    bool hu = true;
    for (const auto& g : {PotentialSeq::constant(0.0), PotentialSeq::cocycle_norm(1.0)}) {
      const auto rep = power_rule_check(f, g, 2, kBase, p, kPowerTol / 2.0);
      worst = std::max(worst, rep.defect);
      hu = hu && rep.hu_defect <= 1e-12;
    }
    report(7, worst <= kPowerTol && hu,
           fmt::format("k = 2: max |estimate_k - k estimate_1| {:.2e} <= {}, hu(f^2) = 2 hu(f) {}", worst, kPowerTol,
                       hu));
  });

  criterion(8, [&] {
    bool ok = true;
    std::string detail;
    const std::vector<std::pair<std::string, PotentialSeq>> cases{
        {"cocycle(1)", PotentialSeq::cocycle_norm(1.0)},
        {"cocycle(-0.5)", PotentialSeq::cocycle_norm(-0.5)},
        {"birkhoff cos", PotentialSeq::birkhoff(cos_x1())},
        {"max(birkhoff cos, 0)", PotentialSeq::max(PotentialSeq::birkhoff(cos_x1()), PotentialSeq::constant(0.0))}};
    for (const auto& [name, g] : cases) {
      const auto rep = stage_limit_check(f, g, {1, 2, 4, 8}, kBase, p, kStageMonotone);
      const bool last = !rep.last_gap || *rep.last_gap <= kStageLast;
      const bool pass = rep.worst_increase <= kStageMonotone && rep.worst_below <= kStageBelow && last;
      ok = ok && pass;
      detail += fmt::format("{}{}: rise {:.1e}, below {:.1e}{}", detail.empty() ? "" : "; ", name, rep.worst_increase,
                            rep.worst_below, rep.last_gap ? fmt::format(", last gap {:.1e}", *rep.last_gap) : "");
    }
    report(8, ok, fmt::format("stages {{1,2,4,8}} (tol {}/{}/{}): {}", kStageMonotone, kStageBelow, kStageLast,
                              detail));
  });

  criterion(9, [&] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    double gibbs = 0.0;
    for (int trial = 0; trial < kLogSumTrials; ++trial) {
      const std::size_t k = 1 + rng() % 10;
      std::vector<double> q(k), a(k);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        q[i] = u(rng) < 0.15 ? 0.0 : u(rng);
        a[i] = -10.0 + 20.0 * u(rng);
        total += q[i];
      }
      if (total == 0.0) q[0] = total = 1.0;
      for (auto& v : q) v /= total;
      const auto r = log_sum_inequality(q, a);
      if (r.lhs > r.rhs + 1e-12) ++violations;
      const auto eq = log_sum_inequality(r.gibbs, a);
      gibbs = std::max(gibbs, std::abs(eq.rhs - eq.lhs));
    }
    report(9, violations == 0 && gibbs <= kGibbsTol,
           fmt::format("{} trials: {} violations, Gibbs equality defect {:.2e} <= {}", kLogSumTrials, violations, gibbs,
                       kGibbsTol));
  });

  criterion(10, [&] {
    const auto chart = build_leaf_chart(f, kBase, p.delta);
    double defect = 0.0, fekete_gap = -INFINITY;
    for (const auto& g : {PotentialSeq::constant(0.0), PotentialSeq::cocycle_norm(1.0)}) {
      const double est = value_of(estimate_pressure(pressure_table(f, g, kBase, p)));
      for (double eps : {0.02, 0.01}) {
        const auto rep = cover_pressure_small(f, chart, g, uniform_cover(p.delta, 2.0 * eps), 5);
        defect = std::max(defect, rep.max_defect);
        fekete_gap = std::max(fekete_gap, est - kFeketeSlack - rep.fekete_bound);
      }
    }
    report(10, defect <= kRowTol && fekete_gap <= 0.0,
           fmt::format("n <= 5, cover scales 0.04/0.02: sub-additivity defect {:.2e} <= {}, "
                       "max(estimate - {} - Fekete) {:.2e} <= 0",
                       defect, kRowTol, kFeketeSlack, fekete_gap));
  });

  criterion(11, [&] {
    const auto half = defaults(0.05);
    double worst = 0.0;
    std::vector<PotentialSeq> gs{PotentialSeq::constant(0.0)};
    for (double t : kLine) gs.push_back(PotentialSeq::cocycle_norm(t));
    for (const auto& g : gs)
      worst = std::max(worst, std::abs(value_of(estimate_pressure(pressure_table(f, g, kBase, p))) -
                                       value_of(estimate_pressure(pressure_table(f, g, kBase, half)))));
    report(11, worst <= kDeltaTol,
           fmt::format("delta 0.1 vs 0.05 over {} potentials: max difference {:.2e} <= {}", gs.size(), worst,
                       kDeltaTol));
  });

  criterion(12, [&] {
    const auto g = perturbed_cat_rotation(0.01);
    const auto chart = build_leaf_chart(g, kBase, p.delta, 30);
    const auto cmp = estimate_comparability_constant(g, chart, 10000);
    const double perturbed = value_of(estimate_pressure(pressure_table(g, PotentialSeq::constant(0.0), kBase, p)));
    const double linear = value_of(estimate_pressure(pressure_table(f, PotentialSeq::constant(0.0), kBase, p)));
    const double shift = std::abs(perturbed - linear);
    report(12, chart.residual() <= kGraphResidual && cmp.constant <= kComparability && shift <= kPerturbShift,
           fmt::format("magnitude 0.01: residual {:.2e} <= {}, comparability {:.6f} <= {}, entropy shift {:.2e} <= {}",
                       chart.residual(), kGraphResidual, cmp.constant, kComparability, shift, kPerturbShift));
  });

  fmt::print("{} of 12 criteria passed\n", 12 - failed);
  return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
