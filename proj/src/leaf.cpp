#include "upress/leaf.hpp"

#include "upress/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace upress {

namespace {

void check_param(const LeafChart& chart, double s) {
  if (!(std::abs(s) <= chart.radius() + kParamTol))
    throw Error(ErrorCode::ParameterOutOfRange, "chart parameter outside [-delta, delta]");
}

void check_radius(double radius) {
  if (!(radius > 0.0) || !(radius < kMaxLeafRadius))
    throw Error(ErrorCode::Radius, "chart radius must lie in (0, 0.25) so the chart cannot self-overlap");
}

struct GraphFrame {
  Vec axis;
  Mat transverse;
  Eigen::RowVectorXd along;  // coordinate along axis
  Mat across;                // transverse coordinates
};

GraphFrame graph_frame(const TorusSystem& sys) {
  const auto& sp = sys.splitting();
  const auto d = static_cast<Eigen::Index>(sys.dim());
  GraphFrame g;
  g.axis = sp.unstable.col(0);
  g.transverse = sp.basis.rightCols(d - 1);
  g.along = sp.basis_inv.row(0);
  g.across = sp.basis_inv.bottomRows(d - 1);
  return g;
}

// Pushes the graph h over `nodes` based at `base` one step forward and re-graphs it over the
// same nodes at the image base point.
Mat push_graph(const TorusSystem& sys, const GraphFrame& g, const Vec& base, const std::vector<double>& nodes,
               const Mat& h, double rate) {
  const auto cols = h.cols();
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) columns[static_cast<std::size_t>(c)].assign(h.col(c).begin(), h.col(c).end());

  auto curve = [&](double u, Vec& p, Vec& tangent) {
    Vec hv(cols), dh(cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      auto cs = local_cubic(nodes, columns[static_cast<std::size_t>(c)], u);
      hv[c] = cs.value;
      dh[c] = cs.slope;
    }
    p = base + u * g.axis + g.transverse * hv;
    tangent = g.axis + g.transverse * dh;
  };
  const Vec image_base = sys.lift(base);
  auto along = [&](double u) {
    Vec p, t;
    curve(u, p, t);
    return g.along.dot(sys.lift(p) - image_base);
  };

  const double delta = nodes.back();
  const double lo_val = along(-delta), hi_val = along(delta);
  Mat out = Mat::Zero(h.rows(), cols);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double target = nodes[k];
    if (target == 0.0) continue;
    if (lo_val > target || hi_val < target)
      throw Error(ErrorCode::NoConvergence, "pushed leaf no longer covers the chart");
    double lo = -delta, hi = delta;
    double u = std::clamp(target / rate, lo, hi);
    for (int it = 0; it < 100; ++it) {
      Vec p, t;
      curve(u, p, t);
      const double val = g.along.dot(sys.lift(p) - image_base) - target;
      if (std::abs(val) <= 1e-16 * (1.0 + std::abs(target))) break;
      (val < 0 ? lo : hi) = u;
      const double slope = g.along.dot(sys.jacobian(p) * t);
      double next = u - val / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - u) < 1e-18) break;
      u = next;
    }
    Vec p, t;
    curve(u, p, t);
    out.row(static_cast<Eigen::Index>(k)) = (g.across * (sys.lift(p) - image_base)).transpose();
  }
  return out;
}

}  // namespace

LeafChart LeafChart::linear(const TorusPoint& center, double radius, const Vec& direction) {
  check_radius(radius);
  if (static_cast<std::size_t>(direction.size()) != center.dim() || direction.norm() == 0.0)
    throw Error(ErrorCode::DimensionMismatch, "chart direction does not match the torus dimension");
  LeafChart c;
  c.kind_ = ChartKind::ExactLinear;
  c.center_ = center;
  c.radius_ = radius;
  c.axis_ = direction.normalized();
  c.frame_ = c.axis_;
  c.transverse_ = Mat(direction.size(), 0);
  return c;
}

LeafChart make_graph_chart(const TorusPoint& center, double radius, const Vec& axis, const Mat& transverse,
                           std::vector<double> nodes, Mat displacement) {
  check_radius(radius);
  if (nodes.size() < 4 || displacement.rows() != static_cast<Eigen::Index>(nodes.size()) ||
      displacement.cols() != transverse.cols())
    throw Error(ErrorCode::DimensionMismatch, "graph node table does not match the chart frame");
  LeafChart c;
  c.kind_ = ChartKind::GraphTransform;
  c.center_ = center;
  c.radius_ = radius;
  c.axis_ = axis;
  c.transverse_ = transverse;
  c.nodes_ = std::move(nodes);
  c.displacement_ = std::move(displacement);
  for (Eigen::Index k = 0; k < c.displacement_.cols(); ++k)
    c.columns_.emplace_back(c.displacement_.col(k).begin(), c.displacement_.col(k).end());
  c.frame_ = c.tangent(0.0).normalized();
  c.arclength_ = make_arclength_table(-radius, radius, kArclengthCells, [&c](double r) { return c.tangent(r).norm(); });
  return c;
}

Vec LeafChart::lift_point(double s) const {
  check_param(*this, s);
  Vec p = center_.coords() + s * axis_;
  for (std::size_t k = 0; k < columns_.size(); ++k)
    p += local_cubic(nodes_, columns_[k], s).value * transverse_.col(static_cast<Eigen::Index>(k));
  return p;
}

Vec LeafChart::tangent(double s) const {
  Vec t = axis_;
  for (std::size_t k = 0; k < columns_.size(); ++k)
    t += local_cubic(nodes_, columns_[k], s).slope * transverse_.col(static_cast<Eigen::Index>(k));
  return t;
}

double LeafChart::arclength(double s) const {
  check_param(*this, s);
  if (kind_ == ChartKind::ExactLinear) return s;
  return arclength_(s);
}

LeafChart build_leaf_chart(const TorusSystem& sys, const TorusPoint& x, double radius, int iterations) {
  check_radius(radius);
  if (x.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "base point dimension differs from system");
  if (sys.unstable_dim() != 1) throw Error(ErrorCode::Unsupported, "exactly one unstable direction is required");
  auto linear = LeafChart::linear(x, radius, sys.splitting().unstable.col(0));
  if (!sys.has_perturbation()) return linear;
  return graph_transform_refine(sys, linear, iterations);
}

LeafChart graph_transform_refine(const TorusSystem& sys, const LeafChart& chart, int iterations) {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "graph transform needs at least one iteration");
  if (!sys.within_cone_threshold())
    throw Error(ErrorCode::NoConvergence, "perturbation magnitude exceeds the cone-preservation threshold");
  const double rate = sys.unstable_rate();
  const auto g = graph_frame(sys);
  const auto d = static_cast<Eigen::Index>(sys.dim());
  auto nodes = chebyshev_nodes(kGraphNodes, chart.radius());

  std::vector<Vec> back{chart.center().coords()};
  for (int j = 0; j < iterations; ++j) back.push_back(TorusPoint(sys.lift_inverse(back.back())).coords());

  Mat previous = Mat::Zero(static_cast<Eigen::Index>(nodes.size()), d - 1);
  std::vector<double> history;
  for (int j = 1; j <= iterations; ++j) {
    Mat h = Mat::Zero(previous.rows(), previous.cols());
    for (int i = j; i >= 1; --i) h = push_graph(sys, g, back[static_cast<std::size_t>(i)], nodes, h, rate);
    double residual = 0.0;
    for (Eigen::Index k = 0; k < h.rows(); ++k)
      residual = std::max(residual, (g.transverse * (h.row(k) - previous.row(k)).transpose()).norm());
    history.push_back(residual);
    previous = std::move(h);
    const auto n = history.size();
    if (n >= 6 && history[n - 1] > 1e-13 && history[n - 1] >= history[n - 6])
      throw Error(ErrorCode::NoConvergence, "graph-transform residual stopped decaying");
  }

  LeafChart out = make_graph_chart(chart.center(), chart.radius(), g.axis, g.transverse, std::move(nodes), previous);
  out.residual_ = history.back();
  out.history_ = std::move(history);
  return out;
}

std::optional<double> residual_decay_rate(const std::vector<double>& history) {
  std::size_t last = 0;
  while (last + 1 < history.size() && history[last + 1] > kResidualFloor) ++last;
  if (last == 0 || !(history[0] > kResidualFloor)) return std::nullopt;
  return std::pow(history[last] / history[0], 1.0 / static_cast<double>(last));
}

double du_distance(const LeafChart& chart, double s, double t) {
  check_param(chart, s);
  check_param(chart, t);
  if (chart.kind() == ChartKind::ExactLinear) return std::abs(s - t);
  return std::abs(chart.arclength(t) - chart.arclength(s));
}

LeafSample sample_leaf(const LeafChart& chart, std::size_t m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "a leaf sample needs at least two points");
  LeafSample out;
  out.params = linspace(-chart.radius(), chart.radius(), m);
  out.points.reserve(m);
  for (double s : out.params) out.points.push_back(chart.point(s));
  out.resolution = 2.0 * chart.radius() / static_cast<double>(m - 1);
  return out;
}

BowenDistanceEvaluator::BowenDistanceEvaluator(const TorusSystem& sys, const LeafChart& chart, int depth,
                                               double lift_budget)
    : chart_(chart), depth_(depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "Bowen depth must be >= 1");
  rate_ = sys.unstable_rate();
  linear_ = chart.kind() == ChartKind::ExactLinear && sys.is_linear();
  const double delta = chart.radius();

  if (linear_) {
    scales_.resize(static_cast<std::size_t>(depth));
    for (int j = 0; j < depth; ++j) scales_[static_cast<std::size_t>(j)] = std::pow(rate_, j);
    pushed_length_ = 2.0 * delta * scales_.back();
    min_speed_ = 1.0;
    if (pushed_length_ > lift_budget) throw Error(ErrorCode::Depth, "pushed-forward leaf exceeds the lift budget");
    return;
  }

  const double growth = rate_ * (1.0 + sys.cone_load());
  const double grow_n = std::pow(growth, depth - 1);
  if (2.0 * delta * grow_n > 4.0 * lift_budget)
    throw Error(ErrorCode::Depth, "pushed-forward leaf exceeds the lift budget");
  // 256 cells per unit of pushed leaf length resolves the period-1 perturbation at every step.
  const std::size_t cells =
      std::max<std::size_t>(kArclengthCells, 256 * static_cast<std::size_t>(std::ceil(2.0 * delta * grow_n)));

  const std::size_t count = 2 * cells + 1;
  const double half = 2.0 * delta / static_cast<double>(2 * cells);
  std::vector<Vec> points(count), tangents(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double r = std::min(delta, -delta + half * static_cast<double>(k));
    points[k] = TorusPoint(chart.lift_point(r)).coords();
    tangents[k] = chart.tangent(r);
  }
  min_speed_ = std::numeric_limits<double>::infinity();
  std::vector<double> speeds(count);
  for (int j = 0; j < depth; ++j) {
    for (std::size_t k = 0; k < count; ++k) speeds[k] = tangents[k].norm();
    tables_.emplace_back(-delta, delta, speeds);
    min_speed_ = std::min(min_speed_, tables_.back().min_speed());
    if (j + 1 < depth) {
      for (std::size_t k = 0; k < count; ++k) {
        tangents[k] = sys.jacobian(points[k]) * tangents[k];
        points[k] = TorusPoint(sys.lift(points[k])).coords();
      }
    }
  }
  pushed_length_ = tables_.back()(delta) - tables_.back()(-delta);
  if (pushed_length_ > lift_budget) throw Error(ErrorCode::Depth, "pushed-forward leaf exceeds the lift budget");
}

double BowenDistanceEvaluator::coordinate(int step, double s) const {
  if (step < 0 || step >= depth_) throw Error(ErrorCode::InvalidArgument, "step outside [0, depth)");
  check_param(chart_, s);
  if (linear_) return scales_[static_cast<std::size_t>(step)] * s;
  return tables_[static_cast<std::size_t>(step)](s);
}

double BowenDistanceEvaluator::step_distance(int step, double s, double t) const {
  return std::abs(coordinate(step, t) - coordinate(step, s));
}

double BowenDistanceEvaluator::distance(double s, double t) const {
  check_param(chart_, s);
  check_param(chart_, t);
  if (linear_) return scales_.back() * std::abs(s - t);
  double d = 0.0;
  for (int j = 0; j < depth_; ++j) d = std::max(d, step_distance(j, s, t));
  return d;
}

ComparabilityReport estimate_comparability_constant(const TorusSystem& sys, const LeafChart& chart, int samples,
                                                    std::uint64_t seed) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "comparability needs at least two samples");
  if (chart.center().dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "chart and system differ");
  ComparabilityReport rep;
  rep.constant = 0.0;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  const double delta = chart.radius();
  for (int i = 0; i < samples; ++i) {
    auto rng = item_rng(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(-delta, delta);
    const double s = u(rng), t = u(rng);
    if (std::abs(s - t) < 1e-9) continue;
    const double d = torus_distance(chart.point(s), chart.point(t));
    const double du = du_distance(chart, s, t);
    const double ratio = du / d;
    rep.constant = std::max(rep.constant, ratio);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (d > du * (1.0 + 1e-12) + 1e-15) rep.lower_bound_holds = false;
    ++rep.pairs;
  }
  return rep;
}

}  // namespace upress
