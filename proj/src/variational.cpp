#include "upress/variational.hpp"

#include "upress/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace upress {

LogSumResult log_sum_inequality(const std::vector<double>& p, const std::vector<double>& a) {
  if (p.size() != a.size() || p.empty()) throw Error(ErrorCode::DimensionMismatch, "p and a must have equal nonzero length");
  double total = 0.0;
  for (double pi : p) {
    if (!(pi >= 0.0)) throw Error(ErrorCode::NotProbability, "probability weights must be nonnegative");
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::NotProbability, "probability weights must sum to 1");

  LogSumResult r;
  const double top = *std::max_element(a.begin(), a.end());
  double z = 0.0;
  for (double ai : a) z += std::exp(ai - top);
  r.rhs = top + std::log(z);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) r.lhs += p[i] * (a[i] - std::log(p[i]));
  r.gibbs.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r.gibbs[i] = std::exp(a[i] - r.rhs);
  if (r.lhs > r.rhs + 1e-12) throw Error(ErrorCode::CheckFailed, "log-sum inequality violated");
  return r;
}

namespace {

// a with log g_n(x) = n a for all x, when the potential algebra forces it.
std::optional<double> step_rate(const PotentialSeq& g, const TorusSystem& sys) {
  const auto& n = g.node();
  auto child = [&](std::size_t i) { return step_rate(n.children[i], sys); };
  switch (n.kind) {
    case PotentialKind::Constant:
      return n.value;
    case PotentialKind::CocycleNorm:
      if (sys.is_linear()) return n.value * std::log(sys.unstable_rate());
      return std::nullopt;
    case PotentialKind::AdditiveBirkhoff:
      if (n.phi.terms.empty()) return n.phi.constant;
      return std::nullopt;
    case PotentialKind::Sum: {
      auto a = child(0), b = child(1);
      if (a && b) return *a + *b;
      return std::nullopt;
    }
    case PotentialKind::Scale:
      if (auto a = child(0)) return n.value * *a;
      return std::nullopt;
    case PotentialKind::Shift:
      if (auto a = child(0)) return *a + n.value;
      return std::nullopt;
    case PotentialKind::Stage:
      return child(0);
    case PotentialKind::Iterate:
      if (auto a = step_rate(n.children[0], *n.base)) return n.steps * *a;
      return std::nullopt;
    case PotentialKind::Max: {
      auto a = child(0), b = child(1);
      if (a && b) return std::max(*a, *b);
      return std::nullopt;
    }
    case PotentialKind::CoboundaryTwist:
    case PotentialKind::Custom:
      return std::nullopt;
  }
  return std::nullopt;
}

double worst(const PressureTable& a, const PressureTable& b, const std::function<double(double, double, int)>& gap) {
  double w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.rows.size(); ++i) w = std::max(w, gap(a.rows[i].log_p, b.rows[i].log_p, a.rows[i].n));
  return w;
}

}  // namespace

std::optional<double> analytic_pressure(const PotentialSeq& g, const TorusSystem& sys) {
  if (!sys.is_linear() || sys.unstable_dim() != 1) return std::nullopt;
  if (g.kind() == PotentialKind::CoboundaryTwist) return analytic_pressure(g.node().children[0], sys);
  if (auto a = step_rate(g, sys)) return sys.log_unstable_volume_growth() + *a;
  return std::nullopt;
}

std::vector<MeasureEntry> default_registry(const TorusSystem& sys, int haar_samples, std::uint64_t seed) {
  std::vector<MeasureEntry> reg{haar_measure(sys, haar_samples, seed)};
  const TorusPoint zero(Vec::Zero(static_cast<Eigen::Index>(sys.dim())));
  if (torus_distance(apply_map(sys, zero), zero) < 1e-9) {
    reg.push_back(periodic_orbit(sys, {zero}));
    return reg;
  }
  for (std::size_t axis = 0; axis < sys.dim(); ++axis) {
    try {
      reg.push_back(center_circle(sys, {zero}, axis));
      return reg;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::Unsupported, "no fixed point or fixed center circle at the origin");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CertifiedEqual:
      return "certified-equal";
    case Verdict::InequalityOnly:
      return "inequality-only";
    case Verdict::Violation:
      return "violation";
  }
  return "unknown";
}

VariationalReport variational_certificate(const TorusSystem& sys, const PotentialSeq& g,
                                          const std::vector<MeasureEntry>& registry, double pressure_estimate,
                                          const std::vector<int>& stages, double tolerance, int jobs) {
  if (registry.empty()) throw Error(ErrorCode::InvalidArgument, "measure registry is empty");
  VariationalReport rep;
  rep.pressure_estimate = pressure_estimate;
  rep.tolerance = tolerance;
  for (const auto& mu : registry) {
    VariationalCandidate c;
    c.measure = mu;
    c.lyapunov = lyapunov_functional(g, sys, mu, stages, jobs);
    c.certified = mu.certified();
    if (c.certified && !c.lyapunov.minus_infinity) {
      c.sum = mu.hu + c.lyapunov.value;
      if (!rep.best_sum || *c.sum > *rep.best_sum) rep.best_sum = c.sum;
      if (*c.sum > pressure_estimate + tolerance) rep.one_sided_safe = false;
    }
    rep.candidates.push_back(std::move(c));
  }
  if (!rep.best_sum) throw Error(ErrorCode::InvalidArgument, "registry has no certified measure with finite G_+");
  rep.gap = pressure_estimate - *rep.best_sum;
  rep.verdict = std::abs(rep.gap) <= tolerance ? Verdict::CertifiedEqual
                : rep.gap > tolerance        ? Verdict::InequalityOnly
                                             : Verdict::Violation;
  return rep;
}

PropertyReport check_properties(const TorusSystem& sys, const PotentialSeq& g, const PotentialSeq& h, double c,
                                double p, const TorusPoint& x, const PressureParams& params, double tolerance) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "convexity weight p must lie in [0, 1]");
  auto table = [&](const PotentialSeq& q) { return pressure_table(sys, q, x, params); };
  auto estimate = [](const PressureTable& t) {
    auto e = estimate_pressure(t);
    if (!e.value) throw Error(ErrorCode::UnderResolved, "pressure table does not support an estimate");
    return *e.value;
  };
  const auto tg = table(g);
  const auto th = table(h);
  const auto tshift = table(PotentialSeq::shift(c, g));
  const double est_g = estimate(tg);

  PropertyReport rep;
  auto add = [&](int item, std::string name, std::string level, double defect, double tol, std::string note = {}) {
    PropertyItem it;
    it.item = item;
    it.name = std::move(name);
    it.level = std::move(level);
    it.defect = defect;
    it.tolerance = tol;
    it.pass = defect <= tol;
    it.note = std::move(note);
    rep.items.push_back(std::move(it));
  };

  add(1, "shift", "row", worst(tshift, tg, [&](double a, double b, int n) { return std::abs(a - b - n * c); }),
      kExactTol);
  add(1, "shift", "estimate", std::abs(estimate(tshift) - est_g - c), kShiftEstimateTol);

  const auto tmax = table(PotentialSeq::max(g, h));
  add(2, "monotone", "row", worst(tg, tmax, [](double a, double b, int) { return a - b; }), kExactTol,
      "compared against max(G, H) >= G");

  const auto tconv = table(PotentialSeq::sum(PotentialSeq::scale(p, g), PotentialSeq::scale(1.0 - p, h)));
  double conv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tg.rows.size(); ++i)
    conv = std::max(conv, tconv.rows[i].log_p - p * tg.rows[i].log_p - (1.0 - p) * th.rows[i].log_p);
  add(3, "convex", "row", conv, kExactTol);

  const auto tsum = table(PotentialSeq::sum(g, h));
  double sub = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tg.rows.size(); ++i)
    sub = std::max(sub, tsum.rows[i].log_p - tg.rows[i].log_p - th.rows[i].log_p);
  add(4, "subadditive-sum", "row", sub, kExactTol);

  const auto tup = table(PotentialSeq::scale(2.0, g));
  add(5, "scale c=2", "row", worst(tup, tg, [](double a, double b, int) { return a - 2.0 * b; }), kExactTol);
  const auto tdown = table(PotentialSeq::scale(0.5, g));
  add(5, "scale c=0.5", "row", worst(tdown, tg, [](double a, double b, int) { return 0.5 * b - a; }), kExactTol);

  if (h.is_additive()) {
    const auto ttwist = table(PotentialSeq::coboundary_twist(g, h));
    add(6, "coboundary", "estimate", std::abs(estimate(ttwist) - est_g), tolerance);
  } else {
    PropertyItem it;
    it.item = 6;
    it.name = "coboundary";
    it.level = "estimate";
    it.supported = false;
    it.pass = true;
    it.tolerance = tolerance;
    it.note = "unsupported: H is only sub-additive; the law is open in that case";
    rep.items.push_back(std::move(it));
  }
  rep.pass = std::all_of(rep.items.begin(), rep.items.end(), [](const auto& i) { return !i.supported || i.pass; });
  return rep;
}

PowerRuleReport power_rule_check(const TorusSystem& sys, const PotentialSeq& g, int k, const TorusPoint& x,
                                 const PressureParams& params, double tolerance) {
  if (k < 2 || k > 3) throw Error(ErrorCode::InvalidArgument, "power rule is checked for k in {2, 3}");
  const TorusSystem fk = sys.power(k);
  PressureParams pk = params;
  const double rate = fk.unstable_rate();
  auto needed = [&](int n_max) {
    double most = 0.0;
    for (double e : pk.epsilons)
      most = std::max(most, static_cast<double>(
                                required_samples(2.0 * pk.delta * std::pow(rate, n_max - 1), e, pk.density_factor)));
    return most;
  };
  while (pk.n_max >= pk.n_min + 3 && needed(pk.n_max) > static_cast<double>(pk.max_samples)) --pk.n_max;
  if (pk.n_max < pk.n_min + 3)
    throw Error(ErrorCode::UnderResolved, "density rule cannot fit four stages of the iterate; lower n_min");

  PowerRuleReport rep;
  rep.k = k;
  rep.n_max_k = pk.n_max;
  rep.tolerance = k * tolerance;
  auto e1 = estimate_pressure(pressure_table(sys, g, x, params));
  auto ek = estimate_pressure(pressure_table(fk, PotentialSeq::iterate(g, k, sys), x, pk));
  if (!e1.value || !ek.value) throw Error(ErrorCode::UnderResolved, "power-rule tables do not support estimates");
  rep.estimate_1 = *e1.value;
  rep.estimate_k = *ek.value;
  rep.defect = std::abs(rep.estimate_k - k * rep.estimate_1);
  rep.hu_1 = haar_measure(sys).hu;
  rep.hu_k = haar_measure(fk).hu;
  rep.hu_defect = std::abs(rep.hu_k - k * rep.hu_1);
  rep.pass = rep.defect <= rep.tolerance && rep.hu_defect <= 1e-12;
  return rep;
}

StageLimitReport stage_limit_check(const TorusSystem& sys, const PotentialSeq& g, const std::vector<int>& stages,
                                   const TorusPoint& x, const PressureParams& params, double tolerance) {
  if (stages.empty()) throw Error(ErrorCode::InvalidArgument, "stage list is empty");
  for (std::size_t i = 0; i < stages.size(); ++i)
    if (stages[i] < 1 || (i && stages[i] <= stages[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "stages must be positive and increasing");

  StageLimitReport rep;
  rep.stages = stages;
  rep.tolerance = tolerance;
  auto est = estimate_pressure(pressure_table(sys, g, x, params));
  if (!est.value) throw Error(ErrorCode::UnderResolved, "sub-additive table does not support an estimate");
  rep.estimate = *est.value;

  std::vector<double> all;  // stage pressures for l = stages.front() .. stages.back()
  for (int l = stages.front(); l <= stages.back(); ++l) {
    auto e = additive_stage_pressure(sys, g, l, x, params);
    if (!e.value) throw Error(ErrorCode::UnderResolved, "stage table does not support an estimate");
    all.push_back(*e.value);
  }
  for (int l : stages) rep.values.push_back(all[static_cast<std::size_t>(l - stages.front())]);

  rep.worst_below = -std::numeric_limits<double>::infinity();
  for (double v : rep.values) rep.worst_below = std::max(rep.worst_below, rep.estimate - v);
  rep.above_estimate = rep.worst_below <= tolerance;

  rep.worst_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < stages.size(); ++i)
    if (stages[i] == 2 * stages[i - 1]) rep.worst_increase = std::max(rep.worst_increase, rep.values[i] - rep.values[i - 1]);
  rep.doubling_nonincreasing = rep.worst_increase <= tolerance;

  rep.full_sequence_nonincreasing = true;
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i] > all[i - 1] + tolerance) rep.full_sequence_nonincreasing = false;

  rep.analytic = analytic_pressure(g, sys);
  if (rep.analytic) {
    rep.last_gap = std::abs(rep.values.back() - rep.estimate);
    rep.last_close = *rep.last_gap <= kStageLastTol;
  }
  rep.pass = rep.above_estimate && rep.doubling_nonincreasing && rep.last_close;
  return rep;
}

}  // namespace upress
