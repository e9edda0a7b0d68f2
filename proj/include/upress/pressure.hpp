#pragma once

#include "upress/leaf.hpp"
#include "upress/potentials.hpp"

#include <optional>
#include <string>
#include <vector>

namespace upress {

/// Slack toward admitting separation: y, z are separated iff d >= eps - kBoundaryTol and lie in
/// each other's closed ball iff d <= eps + kBoundaryTol.
inline constexpr double kBoundaryTol = 1e-12;
inline constexpr int kDefaultDensityFactor = 10;
inline constexpr std::size_t kBruteForceLimit = 20;

/// log(e^a + e^b) without overflow; -infinity is the log of an empty sum.
double log_add(double a, double b);

/// Bowen-ball geometry of a sorted sample at one (n, eps). Every relation is an index interval:
/// i conflicts with j (d^u_n < eps) iff j in [conflict_lo[i], conflict_hi[i]], j != i, and j lies
/// in the closed ball of i iff j in [ball_lo[i], ball_hi[i]].
struct ConflictStructure {
  std::vector<double> params;
  int depth = 1;
  double epsilon = 0.0;
  std::vector<std::size_t> conflict_lo, conflict_hi;
  std::vector<std::size_t> ball_lo, ball_hi;
  /// Parameter half-width eps / lambda^{n-1} of every ball on exact-linear charts.
  std::optional<double> half_width;
  double pushed_length = 0.0;

  std::size_t size() const { return params.size(); }
  bool conflicts(std::size_t i, std::size_t j) const {
    return i != j && j >= conflict_lo[i] && j <= conflict_hi[i];
  }
  bool in_ball(std::size_t center, std::size_t j) const { return j >= ball_lo[center] && j <= ball_hi[center]; }
};

/// Smallest sample size accepted at this (n, eps): factor * ceil(pushed_length / eps) + 1.
std::size_t required_samples(double pushed_length, double epsilon, int density_factor = kDefaultDensityFactor);

/// Builds the index intervals by a two-pointer sweep over the monotone Bowen metric. Throws
/// UnderResolved if the sample is coarser than the density rule (skipped for density_factor 0) and
/// UnsupportedStructure if d^u_n fails the monotonicity audit on sampled triples.
ConflictStructure build_conflicts(const BowenDistanceEvaluator& ev, const std::vector<double>& params, double epsilon,
                                  int density_factor = kDefaultDensityFactor);

enum class SolveMethod { Greedy, Dp, Brute };

struct PackingSolution {
  std::vector<std::size_t> indices;  // ascending
  double log_total = 0.0;
  SolveMethod method = SolveMethod::Dp;
  /// Greedy only: log of sum over picks of the ball sup (the picks as a spanning set).
  std::optional<double> spanning_log_total;
};

struct CoveringSolution {
  std::vector<std::size_t> indices;  // ascending centers
  double log_total = 0.0;
  SolveMethod method = SolveMethod::Dp;
};

/// Per-center max of log weights over the closed ball.
std::vector<double> ball_sup(const ConflictStructure& cs, const std::vector<double>& log_weights);

/// Descending weight, ties to the smaller parameter; each pick removes the points it conflicts with.
PackingSolution greedy_max_separated(const ConflictStructure& cs, const std::vector<double>& log_weights);
/// Maximum-weight separated subset (weighted interval scheduling).
PackingSolution max_weight_separated_dp(const ConflictStructure& cs, const std::vector<double>& log_weights);
/// Minimum-weight cover of the sample by closed balls at sample points; `log_sup` is per center.
CoveringSolution min_weight_spanning_dp(const ConflictStructure& cs, const std::vector<double>& log_sup);

enum class OracleMode { Packing, Covering };
struct OracleSolution {
  std::vector<std::size_t> indices;
  double log_total = 0.0;
};
/// Exhaustive subset enumeration; refuses m > 20 with TooLarge. Covering mode takes per-center sups.
OracleSolution brute_force_oracle(const ConflictStructure& cs, const std::vector<double>& log_values, OracleMode mode);

struct PressureParams {
  double delta = 0.1;
  std::vector<double> epsilons{0.04, 0.02, 0.01};
  int n_min = 2;
  int n_max = 8;
  int density_factor = kDefaultDensityFactor;
  std::size_t max_samples = 2'000'000;
  int graph_iterations = kDefaultGraphIterations;
  double lift_budget = kDefaultLiftBudget;
  int jobs = 1;

  bool operator==(const PressureParams&) const = default;
};

struct PressureRow {
  int n = 0;
  double epsilon = 0.0;
  std::size_t m = 0;
  double log_p = 0.0;
  double log_q = 0.0;
  double log_greedy = 0.0;
  double log_greedy_spanning = 0.0;
};

/// Log weights log g_n at chart parameters; the chart tangent seeds the unstable direction.
std::vector<double> leaf_log_weights(const TorusSystem& sys, const LeafChart& chart, const PotentialSeq& g, int n,
                                     const std::vector<double>& params, int jobs = 1);

/// One (n, eps) row on the sample of size m (m = 0 picks the density-rule minimum).
PressureRow finite_stage_row(const TorusSystem& sys, const BowenDistanceEvaluator& ev, const PotentialSeq& g,
                             double epsilon, std::size_t m = 0, int density_factor = kDefaultDensityFactor);

struct PressureTable {
  std::string system;
  std::string potential;
  TorusPoint base;
  PressureParams params;
  ChartKind chart = ChartKind::ExactLinear;
  std::vector<PressureRow> rows;  // ordered by epsilon (as given), then n
};

/// Builds the chart at x and evaluates every (n, eps) row; rows run in parallel.
PressureTable pressure_table(const TorusSystem& sys, const PotentialSeq& g, const TorusPoint& x,
                             const PressureParams& params);

struct GrowthEstimate {
  double epsilon = 0.0;
  std::optional<double> value;  // separated sums
  std::optional<double> spanning;
  std::vector<double> differences;
};

struct PressureEstimate {
  std::vector<GrowthEstimate> per_epsilon;  // in table order
  std::optional<double> value;              // at the smallest resolved epsilon
  std::optional<double> spanning;
  bool resolved = false;
  /// Estimates are nondecreasing as eps decreases, within the noise allowance.
  bool epsilon_monotone = true;
  std::string diagnostic;
};

inline constexpr double kEpsilonNoise = 0.02;

/// Median of successive (log P_{n'} - log P_n) / (n' - n) over the top half of the stages of each
/// eps; needs at least 4 stages per eps.
PressureEstimate estimate_pressure(const PressureTable& table);

/// Pressure of the additive potential (log g_l) / l.
PressureEstimate additive_stage_pressure(const TorusSystem& sys, const PotentialSeq& g, int stage, const TorusPoint& x,
                                         const PressureParams& params);

std::string_view method_name(SolveMethod m);

}  // namespace upress
