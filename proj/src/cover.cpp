#include "upress/cover.hpp"

#include "upress/error.hpp"
#include "upress/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace upress {

LeafCover::LeafCover(std::vector<CoverInterval> intervals, double delta) : period_(2.0 * delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::Radius, "cover radius must be positive");
  if (intervals.empty()) throw Error(ErrorCode::InvalidArgument, "cover has no intervals");
  for (auto iv : intervals) {
    if (!(iv.hi > iv.lo)) throw Error(ErrorCode::InvalidArgument, "cover interval must have hi > lo");
    const double q = std::floor((iv.lo + delta) / period_);
    iv.lo -= q * period_;
    iv.hi -= q * period_;
    const bool duplicate = std::any_of(tiles_.begin(), tiles_.end(), [&](const CoverInterval& t) {
      return std::abs(t.lo - iv.lo) < 1e-12 && std::abs(t.hi - iv.hi) < 1e-12;
    });
    if (!duplicate) tiles_.push_back(iv);
  }
  std::sort(tiles_.begin(), tiles_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });

  // Every point of [-delta, delta] must lie strictly inside some translate.
  std::vector<CoverInterval> near;
  for (const auto& t : tiles_)
    for (int q = -2; q <= 2; ++q) near.push_back({t.lo + q * period_, t.hi + q * period_});
  double reach = -delta;  // reach itself is not yet covered
  while (reach <= delta) {
    double best = reach;
    for (const auto& iv : near)
      if (iv.lo < reach && iv.hi > best) best = iv.hi;
    if (best <= reach) throw Error(ErrorCode::InvalidArgument, "cover intervals leave part of the leaf uncovered");
    reach = best;
  }
}

bool LeafCover::contains(double x, double y) const {
  for (const auto& t : tiles_) {
    const double q = std::ceil((x - t.lo) / period_) - 1.0;
    if (t.lo + q * period_ < x && y < t.hi + q * period_) return true;
  }
  return false;
}

void LeafCover::elements_at(double x, std::vector<std::pair<std::size_t, long long>>& out) const {
  out.clear();
  for (std::size_t k = 0; k < tiles_.size(); ++k) {
    const auto& t = tiles_[k];
    const auto first = static_cast<long long>(std::floor((x - t.hi) / period_)) + 1;
    const auto last = static_cast<long long>(std::ceil((x - t.lo) / period_)) - 1;
    for (long long q = first; q <= last; ++q)
      if (t.lo + static_cast<double>(q) * period_ < x && x < t.hi + static_cast<double>(q) * period_)
        out.emplace_back(k, q);
  }
}

std::vector<CoverInterval> uniform_cover(double delta, double length) {
  if (!(delta > 0.0) || !(length > 0.0)) throw Error(ErrorCode::InvalidArgument, "cover sizes must be positive");
  const auto count = static_cast<int>(std::ceil(4.0 * delta / length - 1e-9));
  std::vector<CoverInterval> out;
  for (int k = 0; k <= count; ++k) {
    const double c = -delta + k * length / 2.0;
    out.push_back({c - length / 2.0, c + length / 2.0});
  }
  return out;
}

JoinStructure build_join(const BowenDistanceEvaluator& ev, const LeafCover& cover, const std::vector<double>& params,
                         int n, std::size_t limit) {
  if (n < 1 || n > ev.depth()) throw Error(ErrorCode::InvalidArgument, "join depth outside the evaluator range");
  JoinStructure join;
  join.members.resize(params.size());
  std::map<std::vector<long long>, std::size_t> ids;
  std::vector<std::vector<std::pair<std::size_t, long long>>> lists(static_cast<std::size_t>(n)), previous;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (int t = 0; t < n; ++t) cover.elements_at(ev.coordinate(t, params[i]), lists[static_cast<std::size_t>(t)]);
    if (i && lists == previous) {
      join.members[i] = join.members[i - 1];
      continue;
    }
    previous = lists;
    // Every choice of one element per step whose intersection contains this point.
    std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
    if (std::any_of(lists.begin(), lists.end(), [](const auto& l) { return l.empty(); }))
      throw Error(ErrorCode::InvalidArgument, "pushed leaf point outside every cover element");
    for (;;) {
      std::vector<long long> key;
      for (int t = 0; t < n; ++t) {
        const auto& e = lists[static_cast<std::size_t>(t)][choice[static_cast<std::size_t>(t)]];
        key.push_back(static_cast<long long>(e.first));
        key.push_back(e.second);
      }
      auto [it, inserted] = ids.emplace(std::move(key), ids.size());
      if (inserted && ids.size() > limit) throw Error(ErrorCode::TooLarge, "join of the cover exceeds the element limit");
      join.members[i].push_back(it->second);
      std::size_t t = 0;
      while (t < choice.size() && ++choice[t] == lists[t].size()) choice[t++] = 0;
      if (t == choice.size()) break;
    }
    std::sort(join.members[i].begin(), join.members[i].end());
  }
  join.elements = ids.size();
  return join;
}

double cover_log_pressure(const BowenDistanceEvaluator& ev, const LeafCover& cover, const std::vector<double>& params,
                          int n, const std::vector<double>& log_weights) {
  if (n < 1 || n > ev.depth()) throw Error(ErrorCode::InvalidArgument, "cover depth outside the evaluator range");
  const std::size_t m = params.size();
  if (log_weights.size() != m) throw Error(ErrorCode::DimensionMismatch, "one weight per sample point");
  std::vector<std::vector<double>> coord(static_cast<std::size_t>(n), std::vector<double>(m));
  for (int t = 0; t < n; ++t)
    for (std::size_t i = 0; i < m; ++i) coord[static_cast<std::size_t>(t)][i] = ev.coordinate(t, params[i]);
  auto fits = [&](std::size_t i, std::size_t j) {
    for (const auto& c : coord)
      if (!cover.contains(c[i], c[j])) return false;
    return true;
  };

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(m + 1, std::numeric_limits<double>::infinity());
  best[0] = kNegInf;
  std::size_t lo = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!fits(j, j)) throw Error(ErrorCode::InvalidArgument, "sample point outside every join element");
    while (!fits(lo, j)) ++lo;
    double block_max = kNegInf;
    for (std::size_t i = j + 1; i-- > lo;) {
      block_max = std::max(block_max, log_weights[i]);
      best[j + 1] = std::min(best[j + 1], log_add(best[i], block_max));
    }
  }
  return best[m];
}

double cover_log_pressure_oracle(const JoinStructure& join, const std::vector<double>& log_weights) {
  const std::size_t m = join.members.size();
  if (m == 0 || m > 12 || log_weights.size() != m)
    throw Error(ErrorCode::TooLarge, "assignment oracle needs 1..12 points with one weight each");
  double assignments = 1.0;
  for (const auto& mem : join.members) assignments *= static_cast<double>(mem.size());
  if (assignments > static_cast<double>(1 << 22)) throw Error(ErrorCode::TooLarge, "too many assignments");

  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<std::size_t> choice(m, 0);
  std::map<std::size_t, double> sup;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    sup.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::exp(log_weights[i] - top);
      auto& s = sup[join.members[i][choice[i]]];
      s = std::max(s, w);
    }
    double total = 0.0;
    for (const auto& [id, s] : sup) total += s;
    best = std::min(best, total);
    std::size_t i = 0;
    while (i < m && ++choice[i] == join.members[i].size()) choice[i++] = 0;
    if (i == m) break;
  }
  return top + std::log(best);
}

CoverPressureReport cover_pressure_small(const TorusSystem& sys, const LeafChart& chart, const PotentialSeq& g,
                                         const std::vector<CoverInterval>& cover, int n_max, int density_factor,
                                         double lift_budget, int jobs) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  LeafCover tiles(cover, chart.radius());
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& t : tiles.tiles()) shortest = std::min(shortest, t.hi - t.lo);

  BowenDistanceEvaluator ev(sys, chart, n_max, lift_budget);
  CoverPressureReport rep;
  rep.m = required_samples(ev.pushed_length(), shortest / 2.0, density_factor);
  const auto params = linspace(-chart.radius(), chart.radius(), rep.m);

  rep.log_p.resize(static_cast<std::size_t>(n_max));
  rep.join_sizes.resize(static_cast<std::size_t>(n_max));
  parallel_for(static_cast<std::size_t>(n_max), jobs, [&](std::size_t k) {
    const int n = static_cast<int>(k) + 1;
    rep.join_sizes[k] = build_join(ev, tiles, params, n).elements;
    rep.log_p[k] = cover_log_pressure(ev, tiles, params, n, leaf_log_weights(sys, chart, g, n, params));
  });

  rep.fekete_bound = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    rep.fekete_bound = std::min(rep.fekete_bound, rep.log_p[static_cast<std::size_t>(n - 1)] / n);
    for (int k = 1; n + k <= n_max; ++k) {
      const double d = rep.log_p[static_cast<std::size_t>(n + k - 1)] - rep.log_p[static_cast<std::size_t>(n - 1)] -
                       rep.log_p[static_cast<std::size_t>(k - 1)];
      rep.max_defect = std::max(rep.max_defect, d);
    }
  }
  rep.subadditive = rep.max_defect <= 1e-9;
  return rep;
}

}  // namespace upress
