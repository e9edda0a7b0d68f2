#include "upress/pressure.hpp"

#include "upress/error.hpp"
#include "upress/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace upress {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMonotoneTriples = 64;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void check_sorted(const std::vector<double>& params, double delta) {
  if (params.empty()) throw Error(ErrorCode::InvalidArgument, "sample is empty");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (std::abs(params[i]) > delta + kParamTol)
      throw Error(ErrorCode::ParameterOutOfRange, "sample parameter outside the chart");
    if (i && !(params[i] > params[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "sample parameters must be strictly increasing");
  }
}

// Monotonicity of d^u_n in |s - t| on sampled triples s < t < u.
void audit_monotone(const BowenDistanceEvaluator& ev, const std::vector<double>& params) {
  if (ev.is_linear()) return;
  if (!(ev.min_speed() > 0.0))
    throw Error(ErrorCode::UnsupportedStructure, "leaf speed vanishes; Bowen metric is not monotone");
  const std::size_t m = params.size();
  if (m < 3) return;
  for (int k = 0; k < kMonotoneTriples; ++k) {
    auto rng = item_rng(0x6d6f6e6f, static_cast<std::uint64_t>(k));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::size_t idx[3] = {pick(rng), pick(rng), pick(rng)};
    std::sort(idx, idx + 3);
    if (idx[0] == idx[1] || idx[1] == idx[2]) continue;
    const double s = params[idx[0]], t = params[idx[1]], u = params[idx[2]];
    const double outer = ev.distance(s, u);
    if (ev.distance(s, t) > outer + kBoundaryTol || ev.distance(t, u) > outer + kBoundaryTol)
      throw Error(ErrorCode::UnsupportedStructure, "Bowen metric is not monotone along the leaf");
  }
}

// For each i, the index interval of j with pred(d(i, j)) true, assuming pred holds on an interval
// around i whose ends move monotonically with i.
void sweep(const BowenDistanceEvaluator& ev, const std::vector<double>& s, double threshold, bool closed,
           std::vector<std::size_t>& lo, std::vector<std::size_t>& hi) {
  const std::size_t m = s.size();
  auto inside = [&](std::size_t a, std::size_t b) {
    const double d = ev.distance(s[a], s[b]);
    return closed ? d <= threshold : d < threshold;
  };
  lo.assign(m, 0);
  hi.assign(m, 0);
  std::size_t right = 0, left = 0;
  for (std::size_t i = 0; i < m; ++i) {
    right = std::max(right, i);
    while (right + 1 < m && inside(i, right + 1)) ++right;
    hi[i] = right;
    while (left < i && !inside(left, i)) ++left;
    lo[i] = left;
  }
}

double log_sum(const std::vector<double>& log_values, const std::vector<std::size_t>& idx) {
  double acc = kNegInf;
  for (auto i : idx) acc = log_add(acc, log_values[i]);
  return acc;
}

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

std::size_t required_samples(double pushed_length, double epsilon, int density_factor) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const double widths = std::ceil(pushed_length / epsilon);
  const double m = density_factor * widths + 1.0;
  if (!(m < 1e15)) throw Error(ErrorCode::UnderResolved, "density rule needs an unbounded sample");
  return static_cast<std::size_t>(m);
}

ConflictStructure build_conflicts(const BowenDistanceEvaluator& ev, const std::vector<double>& params, double epsilon,
                                  int density_factor) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  check_sorted(params, ev.chart().radius());
  if (density_factor > 0 && params.size() < required_samples(ev.pushed_length(), epsilon, density_factor))
    throw Error(ErrorCode::UnderResolved,
                fmt::format("sample of {} points is below the density rule ({} needed)", params.size(),
                            required_samples(ev.pushed_length(), epsilon, density_factor)));
  audit_monotone(ev, params);

  ConflictStructure cs;
  cs.params = params;
  cs.depth = ev.depth();
  cs.epsilon = epsilon;
  cs.pushed_length = ev.pushed_length();
  if (ev.is_linear()) cs.half_width = epsilon / std::pow(ev.rate(), ev.depth() - 1);
  sweep(ev, params, epsilon - kBoundaryTol, false, cs.conflict_lo, cs.conflict_hi);
  sweep(ev, params, epsilon + kBoundaryTol, true, cs.ball_lo, cs.ball_hi);
  return cs;
}

std::vector<double> ball_sup(const ConflictStructure& cs, const std::vector<double>& log_weights) {
  const std::size_t m = cs.size();
  if (log_weights.size() != m) throw Error(ErrorCode::DimensionMismatch, "one weight per sample point");
  // Ball ends are nondecreasing, so a monotone deque gives every window max.
  std::vector<double> out(m);
  std::deque<std::size_t> window;
  std::size_t next = 0;
  for (std::size_t c = 0; c < m; ++c) {
    while (next <= cs.ball_hi[c]) {
      while (!window.empty() && log_weights[window.back()] <= log_weights[next]) window.pop_back();
      window.push_back(next++);
    }
    while (window.front() < cs.ball_lo[c]) window.pop_front();
    out[c] = log_weights[window.front()];
  }
  return out;
}

PackingSolution greedy_max_separated(const ConflictStructure& cs, const std::vector<double>& log_weights) {
  const std::size_t m = cs.size();
  if (log_weights.size() != m) throw Error(ErrorCode::DimensionMismatch, "one weight per sample point");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return log_weights[a] > log_weights[b]; });
  std::vector<char> blocked(m, 0);
  PackingSolution sol;
  sol.method = SolveMethod::Greedy;
  for (auto i : order) {
    if (blocked[i]) continue;
    sol.indices.push_back(i);
    for (std::size_t j = cs.conflict_lo[i]; j <= cs.conflict_hi[i]; ++j) blocked[j] = 1;
  }
  std::sort(sol.indices.begin(), sol.indices.end());
  sol.log_total = log_sum(log_weights, sol.indices);
  sol.spanning_log_total = log_sum(ball_sup(cs, log_weights), sol.indices);
  return sol;
}

PackingSolution max_weight_separated_dp(const ConflictStructure& cs, const std::vector<double>& log_weights) {
  const std::size_t m = cs.size();
  if (log_weights.size() != m) throw Error(ErrorCode::DimensionMismatch, "one weight per sample point");
  for (std::size_t i = 0; i < m; ++i)
    if (cs.conflict_lo[i] > i || cs.conflict_hi[i] < i || (i && cs.conflict_lo[i] < cs.conflict_lo[i - 1]))
      throw Error(ErrorCode::UnsupportedStructure, "conflict relation is not interval-structured");

  // best[j]: optimum over the first j points.
  std::vector<double> best(m + 1, kNegInf);
  std::vector<char> take(m + 1, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    const std::size_t i = j - 1;
    const double with = log_add(log_weights[i], best[cs.conflict_lo[i]]);
    if (with > best[j - 1]) {
      best[j] = with;
      take[j] = 1;
    } else {
      best[j] = best[j - 1];
    }
  }
  PackingSolution sol;
  sol.method = SolveMethod::Dp;
  for (std::size_t j = m; j > 0;) {
    if (take[j]) {
      sol.indices.push_back(j - 1);
      j = cs.conflict_lo[j - 1];
    } else {
      --j;
    }
  }
  std::reverse(sol.indices.begin(), sol.indices.end());
  sol.log_total = best[m];
  return sol;
}

CoveringSolution min_weight_spanning_dp(const ConflictStructure& cs, const std::vector<double>& log_sup) {
  const std::size_t m = cs.size();
  if (log_sup.size() != m) throw Error(ErrorCode::DimensionMismatch, "one ball sup per sample point");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // cost[j]: cheapest cover of the first j points.
  std::vector<double> cost(m + 1, kInf);
  std::vector<std::size_t> center(m + 1, 0);
  cost[0] = kNegInf;
  for (std::size_t j = 1; j <= m; ++j) {
    const std::size_t p = j - 1;
    // Ball membership is symmetric, so the centers covering p are exactly p's own ball.
    for (std::size_t c = cs.ball_lo[p]; c <= cs.ball_hi[p]; ++c) {
      if (!cs.in_ball(c, p)) continue;
      const double prior = cost[cs.ball_lo[c]];
      if (prior == kInf) continue;
      const double v = log_add(prior, log_sup[c]);
      if (v < cost[j]) {
        cost[j] = v;
        center[j] = c;
      }
    }
    if (cost[j] == kInf) throw Error(ErrorCode::InvalidArgument, "sample point covered by no Bowen ball");
  }
  CoveringSolution sol;
  sol.method = SolveMethod::Dp;
  for (std::size_t j = m; j > 0; j = cs.ball_lo[center[j]]) sol.indices.push_back(center[j]);
  std::sort(sol.indices.begin(), sol.indices.end());
  sol.indices.erase(std::unique(sol.indices.begin(), sol.indices.end()), sol.indices.end());
  sol.log_total = cost[m];
  return sol;
}

OracleSolution brute_force_oracle(const ConflictStructure& cs, const std::vector<double>& log_values, OracleMode mode) {
  const std::size_t m = cs.size();
  if (m > kBruteForceLimit) throw Error(ErrorCode::TooLarge, "brute-force oracle refuses samples above 20 points");
  if (log_values.size() != m) throw Error(ErrorCode::DimensionMismatch, "one value per sample point");
  const double top = *std::max_element(log_values.begin(), log_values.end());
  std::vector<double> scaled(m);
  std::vector<std::uint32_t> relation(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = std::exp(log_values[i] - top);
    for (std::size_t j = 0; j < m; ++j) {
      const bool related = mode == OracleMode::Packing ? cs.conflicts(i, j) : cs.in_ball(i, j);
      if (related) relation[i] |= 1u << j;
    }
  }
  const std::uint32_t count = 1u << m, full = count - 1;
  std::vector<double> total(count, 0.0);
  std::vector<std::uint32_t> state(count, 0);  // packing: 1 if separated; covering: covered set
  state[0] = mode == OracleMode::Packing ? 1u : 0u;
  double best = mode == OracleMode::Packing ? 0.0 : std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    const auto low = static_cast<std::size_t>(__builtin_ctz(mask));
    const std::uint32_t rest = mask & (mask - 1);
    total[mask] = total[rest] + scaled[low];
    if (mode == OracleMode::Packing) {
      state[mask] = state[rest] && !(relation[low] & rest);
      if (state[mask] && total[mask] > best) best = total[mask], best_mask = mask;
    } else {
      state[mask] = state[rest] | relation[low];
      if (state[mask] == full && total[mask] < best) best = total[mask], best_mask = mask;
    }
  }
  OracleSolution sol;
  for (std::size_t i = 0; i < m; ++i)
    if (best_mask >> i & 1u) sol.indices.push_back(i);
  sol.log_total = top + std::log(best);
  return sol;
}

std::vector<double> leaf_log_weights(const TorusSystem& sys, const LeafChart& chart, const PotentialSeq& g, int n,
                                     const std::vector<double>& params, int jobs) {
  std::vector<double> out(params.size());
  const bool carry_tangent = chart.kind() == ChartKind::GraphTransform;
  parallel_for(params.size(), jobs, [&](std::size_t i) {
    const double s = params[i];
    Orbit orbit(sys, chart.point(s), carry_tangent ? std::optional<Vec>(chart.tangent(s)) : std::nullopt);
    out[i] = g.eval(orbit, 0, n);
  });
  return out;
}

PressureRow finite_stage_row(const TorusSystem& sys, const BowenDistanceEvaluator& ev, const PotentialSeq& g,
                             double epsilon, std::size_t m, int density_factor) {
  if (m == 0) m = required_samples(ev.pushed_length(), epsilon, density_factor);
  const double delta = ev.chart().radius();
  auto params = linspace(-delta, delta, m);
  auto cs = build_conflicts(ev, params, epsilon, density_factor);
  auto weights = leaf_log_weights(sys, ev.chart(), g, ev.depth(), params);
  PressureRow row;
  row.n = ev.depth();
  row.epsilon = epsilon;
  row.m = m;
  row.log_p = max_weight_separated_dp(cs, weights).log_total;
  row.log_q = min_weight_spanning_dp(cs, ball_sup(cs, weights)).log_total;
  auto greedy = greedy_max_separated(cs, weights);
  row.log_greedy = greedy.log_total;
  row.log_greedy_spanning = *greedy.spanning_log_total;
  return row;
}

namespace {

void validate(const PressureParams& p) {
  if (!(p.delta > 0.0) || !(p.delta < kMaxLeafRadius))
    throw Error(ErrorCode::Radius, "delta must lie in (0, 0.25)");
  if (p.epsilons.empty()) throw Error(ErrorCode::InvalidArgument, "epsilon list is empty");
  for (double e : p.epsilons)
    if (!(e > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (p.n_min < 1 || p.n_max < p.n_min) throw Error(ErrorCode::InvalidArgument, "need 1 <= n_min <= n_max");
  if (p.density_factor < 1) throw Error(ErrorCode::InvalidArgument, "density factor must be >= 1");
  if (p.jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be >= 1");
}

}  // namespace

PressureTable pressure_table(const TorusSystem& sys, const PotentialSeq& g, const TorusPoint& x,
                             const PressureParams& params) {
  validate(params);
  // Refuse infeasible grids before any heavy work: the growth bound dominates every leaf length.
  const double growth = sys.unstable_rate() * (sys.is_linear() ? 1.0 : 1.0 + sys.cone_load());
  for (double eps : params.epsilons) {
    const double bound = 2.0 * params.delta * std::pow(growth, params.n_max - 1);
    if (required_samples(bound, eps, params.density_factor) > params.max_samples)
      throw Error(ErrorCode::UnderResolved,
                  fmt::format("n={} at epsilon={} needs more than {} sample points", params.n_max, eps,
                              params.max_samples));
  }

  PressureTable table;
  table.system = sys.name();
  table.potential = g.describe();
  table.base = x;
  table.params = params;
  const auto chart = build_leaf_chart(sys, x, params.delta, params.graph_iterations);
  table.chart = chart.kind();

  const int depths = params.n_max - params.n_min + 1;
  std::vector<std::optional<BowenDistanceEvaluator>> evaluators(static_cast<std::size_t>(depths));
  parallel_for(evaluators.size(), params.jobs, [&](std::size_t k) {
    evaluators[k].emplace(sys, chart, params.n_min + static_cast<int>(k), params.lift_budget);
  });

  const std::size_t cells = params.epsilons.size() * evaluators.size();
  table.rows.resize(cells);
  parallel_for(cells, params.jobs, [&](std::size_t r) {
    const double eps = params.epsilons[r / evaluators.size()];
    const auto& ev = *evaluators[r % evaluators.size()];
    table.rows[r] = finite_stage_row(sys, ev, g, eps, 0, params.density_factor);
  });
  return table;
}

PressureEstimate estimate_pressure(const PressureTable& table) {
  PressureEstimate out;
  std::vector<double> eps_order;
  for (const auto& row : table.rows)
    if (std::find(eps_order.begin(), eps_order.end(), row.epsilon) == eps_order.end()) eps_order.push_back(row.epsilon);

  for (double eps : eps_order) {
    std::vector<PressureRow> rows;
    for (const auto& row : table.rows)
      if (row.epsilon == eps) rows.push_back(row);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    GrowthEstimate ge;
    ge.epsilon = eps;
    if (rows.size() >= 4) {
      const std::size_t first = rows.size() / 2;  // top half of the stages
      std::vector<double> dq;
      for (std::size_t k = first + 1; k < rows.size(); ++k) {
        const double dn = rows[k].n - rows[k - 1].n;
        ge.differences.push_back((rows[k].log_p - rows[k - 1].log_p) / dn);
        dq.push_back((rows[k].log_q - rows[k - 1].log_q) / dn);
      }
      ge.value = median(ge.differences);
      ge.spanning = median(dq);
    }
    out.per_epsilon.push_back(ge);
  }

  const GrowthEstimate* finest = nullptr;
  for (const auto& ge : out.per_epsilon)
    if (ge.value && (!finest || ge.epsilon < finest->epsilon)) finest = &ge;
  out.resolved = finest != nullptr &&
                 std::all_of(out.per_epsilon.begin(), out.per_epsilon.end(), [](const auto& g) { return g.value; });
  if (!out.resolved) {
    out.diagnostic = "under-resolved: fewer than 4 stages for some epsilon";
    return out;
  }
  out.value = finest->value;
  out.spanning = finest->spanning;

  std::vector<const GrowthEstimate*> by_eps;
  for (const auto& ge : out.per_epsilon) by_eps.push_back(&ge);
  std::sort(by_eps.begin(), by_eps.end(), [](auto a, auto b) { return a->epsilon > b->epsilon; });
  for (std::size_t k = 1; k < by_eps.size(); ++k)
    if (*by_eps[k]->value < *by_eps[k - 1]->value - kEpsilonNoise) out.epsilon_monotone = false;
  if (!out.epsilon_monotone) out.diagnostic = "estimate decreases as epsilon shrinks beyond the noise allowance";
  return out;
}

PressureEstimate additive_stage_pressure(const TorusSystem& sys, const PotentialSeq& g, int stage, const TorusPoint& x,
                                         const PressureParams& params) {
  return estimate_pressure(pressure_table(sys, PotentialSeq::stage(g, stage), x, params));
}

std::string_view method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Greedy:
      return "greedy";
    case SolveMethod::Dp:
      return "dp";
    case SolveMethod::Brute:
      return "brute";
  }
  return "unknown";
}

}  // namespace upress
