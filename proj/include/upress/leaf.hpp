#pragma once

#include "upress/dynamics.hpp"
#include "upress/interp.hpp"

#include <optional>
#include <vector>

namespace upress {

/// Largest admissible chart radius: half the injectivity radius (1/2) of the flat unit torus.
inline constexpr double kMaxLeafRadius = 0.25;
/// Chart parameters are compared with this absolute tolerance.
inline constexpr double kParamTol = 1e-12;
inline constexpr std::size_t kGraphNodes = 257;
inline constexpr std::size_t kArclengthCells = 4 * (kGraphNodes - 1);
inline constexpr int kDefaultGraphIterations = 30;
inline constexpr double kDefaultLiftBudget = 1e4;

enum class ChartKind { ExactLinear, GraphTransform };

/// Local unstable disk W^u(x, delta) parameterized over s in [-delta, delta].
///
/// Exact-linear charts are the straight segment x + s*v_u of the universal cover. Graph charts
/// are x + s*e_u + T h(s), where e_u is the linear unstable eigenvector, T spans the linear
/// center-stable eigenvectors and h is stored at Chebyshev-Lobatto nodes and interpolated by
/// local cubics. Charts are immutable once built.
class LeafChart {
public:
  static LeafChart linear(const TorusPoint& center, double radius, const Vec& direction);

  ChartKind kind() const { return kind_; }
  const TorusPoint& center() const { return center_; }
  double radius() const { return radius_; }
  /// Unit tangent of the leaf at the center.
  const Vec& frame() const { return frame_; }
  /// Sup displacement of the last graph-transform iteration (0 for linear charts).
  double residual() const { return residual_; }
  const std::vector<double>& residual_history() const { return history_; }

  /// Lift of the chart point to R^d, continuous in s; center() has lift center().coords().
  Vec lift_point(double s) const;
  TorusPoint point(double s) const { return TorusPoint(lift_point(s)); }
  Vec tangent(double s) const;
  /// Leafwise arclength coordinate of s measured from the center.
  double arclength(double s) const;

  const Vec& axis() const { return axis_; }
  const Mat& transverse() const { return transverse_; }
  const std::vector<double>& nodes() const { return nodes_; }
  /// Graph values, one row per node, one column per transverse direction.
  const Mat& displacement() const { return displacement_; }

private:
  friend LeafChart graph_transform_refine(const TorusSystem&, const LeafChart&, int);
  friend LeafChart make_graph_chart(const TorusPoint&, double, const Vec&, const Mat&, std::vector<double>, Mat);

  ChartKind kind_ = ChartKind::ExactLinear;
  TorusPoint center_;
  double radius_ = 0.0;
  Vec frame_;
  Vec axis_;
  Mat transverse_;
  std::vector<double> nodes_;
  Mat displacement_;
  std::vector<std::vector<double>> columns_;  // displacement_ columns for interpolation
  ArclengthTable arclength_;
  double residual_ = 0.0;
  std::vector<double> history_;
};

/// Graph chart from explicit node data (node values are transverse coordinates).
LeafChart make_graph_chart(const TorusPoint& center, double radius, const Vec& axis, const Mat& transverse,
                           std::vector<double> nodes, Mat displacement);

/// Chart of the local unstable disk at x. Linear systems get the exact segment; systems carrying a
/// perturbation get a graph-transform chart refined for `iterations` steps.
LeafChart build_leaf_chart(const TorusSystem& sys, const TorusPoint& x, double radius,
                           int iterations = kDefaultGraphIterations);

/// Graph transform along the backward orbit of the chart center: the leaf at iteration j is the
/// j-fold push-forward of the linear graph at f^{-j}(center), truncated to the chart radius.
/// Throws NoConvergence above the cone threshold or when the residual stops decaying.
LeafChart graph_transform_refine(const TorusSystem& sys, const LeafChart& chart, int iterations);

inline constexpr double kResidualFloor = 1e-12;

/// Geometric-mean ratio of successive residuals while they stay above kResidualFloor; empty when
/// fewer than two residuals do.
std::optional<double> residual_decay_rate(const std::vector<double>& history);

/// Leafwise distance d^u between chart parameters s and t.
double du_distance(const LeafChart& chart, double s, double t);

/// Discretized leaf: m equally spaced parameters spanning [-delta, delta].
struct LeafSample {
  std::vector<double> params;
  std::vector<TorusPoint> points;
  double resolution = 0.0;  // declared max gap
};

LeafSample sample_leaf(const LeafChart& chart, std::size_t m);

/// d^u_n on one chart. Every push-forward the metric needs is tabulated at construction, so
/// concurrent const calls are safe.
class BowenDistanceEvaluator {
public:
  BowenDistanceEvaluator(const TorusSystem& sys, const LeafChart& chart, int depth,
                         double lift_budget = kDefaultLiftBudget);

  int depth() const { return depth_; }
  const LeafChart& chart() const { return chart_; }
  /// True when d^u_n(s, t) = rate^{n-1} |s - t| exactly.
  bool is_linear() const { return linear_; }
  double rate() const { return rate_; }

  /// Signed leaf coordinate of f^step(point(s)) measured from f^step(center).
  double coordinate(int step, double s) const;
  double step_distance(int step, double s, double t) const;
  double distance(double s, double t) const;
  /// Leaf length of f^{n-1} applied to the whole chart.
  double pushed_length() const { return pushed_length_; }
  /// Smallest tabulated leaf speed over all steps; positive speeds make d^u_n monotone in |s - t|.
  double min_speed() const { return min_speed_; }

private:
  LeafChart chart_;
  int depth_ = 1;
  bool linear_ = false;
  double rate_ = 1.0;
  std::vector<double> scales_;
  std::vector<ArclengthTable> tables_;
  double pushed_length_ = 0.0;
  double min_speed_ = 0.0;
};

struct ComparabilityReport {
  double constant = 1.0;   // max d^u / d
  double min_ratio = 1.0;  // min d^u / d
  bool lower_bound_holds = true;
  int pairs = 0;
};

/// Estimates C in d(y, z) <= d^u(y, z) <= C d(y, z) over random chart pairs.
ComparabilityReport estimate_comparability_constant(const TorusSystem& sys, const LeafChart& chart, int samples,
                                                    std::uint64_t seed = 7);

}  // namespace upress
