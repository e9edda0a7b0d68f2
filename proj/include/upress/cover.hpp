#pragma once

#include "upress/pressure.hpp"

#include <vector>

namespace upress {

/// Open interval (lo, hi) of leaf coordinates at step 0.
struct CoverInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const CoverInterval&) const = default;
};

/// Cover of the leaf line: the given intervals repeated with period 2 delta, every translate a
/// distinct element. Intervals are stored with lo reduced into [-delta, delta); duplicates merge.
class LeafCover {
public:
  LeafCover(std::vector<CoverInterval> intervals, double delta);

  double period() const { return period_; }
  const std::vector<CoverInterval>& tiles() const { return tiles_; }
  /// True when one translate contains [x, y].
  bool contains(double x, double y) const;
  /// (tile, translate) pairs whose element contains x.
  void elements_at(double x, std::vector<std::pair<std::size_t, long long>>& out) const;

private:
  double period_;
  std::vector<CoverInterval> tiles_;
};

/// Intervals of length `length` centered at -delta + k * length / 2.
std::vector<CoverInterval> uniform_cover(double delta, double length);

inline constexpr std::size_t kJoinLimit = 100'000;

/// Elements of the join of U, f^-1 U, ..., f^-(n-1) U met by the sample; members[i] lists the
/// elements containing sample point i. Throws TooLarge beyond `limit` elements.
struct JoinStructure {
  std::size_t elements = 0;
  std::vector<std::vector<std::size_t>> members;
};

JoinStructure build_join(const BowenDistanceEvaluator& ev, const LeafCover& cover, const std::vector<double>& params,
                         int n, std::size_t limit = kJoinLimit);

/// log p_n on the sample: min over refinements of the join of sum of block sups, computed by DP
/// over contiguous blocks that fit inside one join element.
double cover_log_pressure(const BowenDistanceEvaluator& ev, const LeafCover& cover, const std::vector<double>& params,
                          int n, const std::vector<double>& log_weights);

/// Exhaustive assignment of sample points to join elements (m <= 12 and at most 2^22 assignments).
double cover_log_pressure_oracle(const JoinStructure& join, const std::vector<double>& log_weights);

struct CoverPressureReport {
  std::size_t m = 0;
  std::vector<double> log_p;  // index k holds n = k + 1
  std::vector<std::size_t> join_sizes;
  double max_defect = 0.0;  // max of log p_{n+k} - log p_n - log p_k, floored at 0
  bool subadditive = false;
  double fekete_bound = 0.0;  // min_n (1/n) log p_n
};

/// Cover pressures for n = 1..n_max on one sample sized by the density rule at half the shortest
/// cover interval.
CoverPressureReport cover_pressure_small(const TorusSystem& sys, const LeafChart& chart, const PotentialSeq& g,
                                         const std::vector<CoverInterval>& cover, int n_max,
                                         int density_factor = kDefaultDensityFactor,
                                         double lift_budget = kDefaultLiftBudget, int jobs = 1);

}  // namespace upress
