#include "upress/potentials.hpp"

#include "upress/error.hpp"
#include "upress/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace upress {

Orbit::Orbit(const TorusSystem& sys, const TorusPoint& x, std::optional<Vec> unstable) : sys_(&sys) {
  if (x.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "orbit point dimension differs from system");
  points_.push_back(x.coords());
  if (unstable) directions_.push_back(unstable->normalized());
}

const Vec& Orbit::point(int i) {
  while (static_cast<int>(points_.size()) <= i) points_.push_back(TorusPoint(sys_->lift(points_.back())).coords());
  return points_[static_cast<std::size_t>(i)];
}

const Vec& Orbit::direction(int i) {
  if (directions_.empty()) {
    directions_.push_back(sys_->is_linear() ? Vec(sys_->splitting().unstable.col(0))
                                             : unstable_direction(*sys_, TorusPoint(points_.front())));
  }
  if (sys_->is_linear()) return directions_.front();
  while (static_cast<int>(directions_.size()) <= i) log_unstable_step(static_cast<int>(directions_.size()) - 1);
  return directions_[static_cast<std::size_t>(i)];
}

double Orbit::log_unstable_step(int i) {
  if (sys_->is_linear()) return std::log(sys_->unstable_rate());
  while (static_cast<int>(log_steps_.size()) <= i) {
    const int j = static_cast<int>(log_steps_.size());
    const Vec& e = direction(j);
    Vec v = sys_->jacobian(point(j)) * e;
    const double norm = v.norm();
    log_steps_.push_back(std::log(norm));
    if (static_cast<int>(directions_.size()) == j + 1) directions_.push_back(v / norm);
  }
  return log_steps_[static_cast<std::size_t>(i)];
}

namespace {

using Node = PotentialSeq::Node;

std::shared_ptr<Node> make_node(PotentialKind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

double eval_node(const Node& node, Orbit& orbit, int start, int n) {
  if (n == 0) return 0.0;
  switch (node.kind) {
    case PotentialKind::AdditiveBirkhoff: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += node.phi.value(orbit.point(start + i));
      return s;
    }
    case PotentialKind::CocycleNorm: {
      const auto& sys = orbit.system();
      if (sys.is_linear()) return node.value * n * std::log(sys.unstable_rate());
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += orbit.log_unstable_step(start + i);
      return node.value * s;
    }
    case PotentialKind::Constant:
      return n * node.value;
    case PotentialKind::Sum:
      return node.children[0].eval(orbit, start, n) + node.children[1].eval(orbit, start, n);
    case PotentialKind::Scale:
      return node.value * node.children[0].eval(orbit, start, n);
    case PotentialKind::Shift:
      return node.children[0].eval(orbit, start, n) + n * node.value;
    case PotentialKind::CoboundaryTwist: {
      const auto& h = node.children[1];
      return node.children[0].eval(orbit, start, n) + h.eval(orbit, start + 1, n) - h.eval(orbit, start, n);
    }
    case PotentialKind::Max:
      return std::max(node.children[0].eval(orbit, start, n), node.children[1].eval(orbit, start, n));
    case PotentialKind::Stage: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += node.children[0].eval(orbit, start + i, node.steps);
      return s / node.steps;
    }
    case PotentialKind::Iterate: {
      Orbit base(*node.base, TorusPoint(orbit.point(start)));
      return node.children[0].eval(base, 0, node.steps * n);
    }
    case PotentialKind::Custom:
      return node.custom(orbit.system(), TorusPoint(orbit.point(start)), n);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown potential kind");
}

bool additive(const Node& node) {
  switch (node.kind) {
    case PotentialKind::AdditiveBirkhoff:
    case PotentialKind::Constant:
    case PotentialKind::Stage:
      return true;
    case PotentialKind::CocycleNorm:
      return true;  // E^u is one-dimensional, so the restricted norms multiply
    case PotentialKind::Sum:
    case PotentialKind::CoboundaryTwist:
      return node.children[0].is_additive() && node.children[1].is_additive();
    case PotentialKind::Scale:
    case PotentialKind::Shift:
    case PotentialKind::Iterate:
      return node.children[0].is_additive();
    case PotentialKind::Max:
    case PotentialKind::Custom:
      return false;
  }
  return false;
}

std::string describe_phi(const TrigPolynomial& phi) {
  std::string out = fmt::format("{}", phi.constant);
  for (const auto& t : phi.terms) {
    std::string wave;
    for (std::size_t i = 0; i < t.wave.size(); ++i) wave += fmt::format("{}{}", i ? "," : "", t.wave[i]);
    if (t.sin_coef != 0.0) out += fmt::format(" + {}*sin[{}]", t.sin_coef, wave);
    if (t.cos_coef != 0.0) out += fmt::format(" + {}*cos[{}]", t.cos_coef, wave);
  }
  return out;
}

}  // namespace

PotentialSeq PotentialSeq::birkhoff(TrigPolynomial phi) {
  auto n = make_node(PotentialKind::AdditiveBirkhoff);
  n->phi = std::move(phi);
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::cocycle_norm(double t) {
  auto n = make_node(PotentialKind::CocycleNorm);
  n->value = t;
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::constant(double c) {
  auto n = make_node(PotentialKind::Constant);
  n->value = c;
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::sum(PotentialSeq g, PotentialSeq h) {
  auto n = make_node(PotentialKind::Sum);
  n->children = {std::move(g), std::move(h)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::scale(double c, PotentialSeq g) {
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scale factor must be >= 0 to keep sub-additivity");
  auto n = make_node(PotentialKind::Scale);
  n->value = c;
  n->children = {std::move(g)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::shift(double c, PotentialSeq g) {
  auto n = make_node(PotentialKind::Shift);
  n->value = c;
  n->children = {std::move(g)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::coboundary_twist(PotentialSeq g, PotentialSeq h) {
  if (!h.is_additive()) throw Error(ErrorCode::Unsupported, "coboundary twist needs an additive potential H");
  auto n = make_node(PotentialKind::CoboundaryTwist);
  n->children = {std::move(g), std::move(h)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::max(PotentialSeq g, PotentialSeq h) {
  auto n = make_node(PotentialKind::Max);
  n->children = {std::move(g), std::move(h)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::stage(PotentialSeq g, int l) {
  if (l < 1) throw Error(ErrorCode::InvalidArgument, "stage length must be >= 1");
  auto n = make_node(PotentialKind::Stage);
  n->steps = l;
  n->children = {std::move(g)};
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::iterate(PotentialSeq g, int k, TorusSystem base) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "iterate power must be >= 1");
  auto n = make_node(PotentialKind::Iterate);
  n->steps = k;
  n->children = {std::move(g)};
  n->base = std::make_shared<const TorusSystem>(std::move(base));
  return PotentialSeq(n);
}

PotentialSeq PotentialSeq::custom(std::string label, CustomPotential fn) {
  if (!fn) throw Error(ErrorCode::InvalidArgument, "custom potential needs an evaluator");
  auto n = make_node(PotentialKind::Custom);
  n->label = std::move(label);
  n->custom = std::move(fn);
  return PotentialSeq(n);
}

PotentialKind PotentialSeq::kind() const { return node_->kind; }

bool PotentialSeq::is_additive() const { return additive(*node_); }

std::string PotentialSeq::describe() const {
  const auto& n = *node_;
  switch (n.kind) {
    case PotentialKind::AdditiveBirkhoff:
      return fmt::format("birkhoff({})", describe_phi(n.phi));
    case PotentialKind::CocycleNorm:
      return fmt::format("cocycle_norm({})", n.value);
    case PotentialKind::Constant:
      return fmt::format("constant({})", n.value);
    case PotentialKind::Sum:
      return fmt::format("sum({}, {})", n.children[0].describe(), n.children[1].describe());
    case PotentialKind::Scale:
      return fmt::format("scale({}, {})", n.value, n.children[0].describe());
    case PotentialKind::Shift:
      return fmt::format("shift({}, {})", n.value, n.children[0].describe());
    case PotentialKind::CoboundaryTwist:
      return fmt::format("twist({}, {})", n.children[0].describe(), n.children[1].describe());
    case PotentialKind::Max:
      return fmt::format("max({}, {})", n.children[0].describe(), n.children[1].describe());
    case PotentialKind::Stage:
      return fmt::format("stage({}, {})", n.children[0].describe(), n.steps);
    case PotentialKind::Iterate:
      return fmt::format("iterate({}, {})", n.children[0].describe(), n.steps);
    case PotentialKind::Custom:
      return fmt::format("custom({})", n.label);
  }
  return "unknown";
}

double PotentialSeq::eval(Orbit& orbit, int start, int n) const {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "potential index n must be >= 0");
  return eval_node(*node_, orbit, start, n);
}

double PotentialSeq::eval(const TorusSystem& sys, const TorusPoint& x, int n) const {
  Orbit orbit(sys, x);
  return eval(orbit, 0, n);
}

double eval_log_gn(const PotentialSeq& g, const TorusSystem& sys, const TorusPoint& x, int n) {
  return g.eval(sys, x, n);
}

SubadditivityReport check_subadditivity(const PotentialSeq& g, const TorusSystem& sys, int trials, int max_n,
                                        std::uint64_t seed) {
  if (trials < 1 || max_n < 2) throw Error(ErrorCode::InvalidArgument, "need trials >= 1 and max_n >= 2");
  SubadditivityReport rep;
  rep.trials = trials;
  rep.max_n = max_n;
  rep.seed = seed;
  const bool additive_g = g.is_additive();
  double defect = 0.0;
  for (int i = 0; i < trials; ++i) {
    auto rng = item_rng(seed, static_cast<std::uint64_t>(i));
    TorusPoint x = uniform_point(rng, sys.dim());
    std::uniform_int_distribution<int> pick_n(1, max_n - 1);
    const int n = pick_n(rng);
    std::uniform_int_distribution<int> pick_m(1, max_n - n);
    const int m = pick_m(rng);
    Orbit orbit(sys, x);
    const double lhs = g.eval(orbit, 0, n + m);
    const double rhs = g.eval(orbit, 0, n) + g.eval(orbit, n, m);
    rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    defect = std::max(defect, std::abs(lhs - rhs));
  }
  if (additive_g) rep.max_equality_defect = defect;
  rep.pass = rep.max_violation <= 1e-9;
  return rep;
}

MeasureEntry haar_measure(const TorusSystem& sys, int samples, std::uint64_t seed) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "Haar Monte Carlo needs at least two samples");
  MeasureEntry mu;
  mu.kind = MeasureKind::HaarVolume;
  mu.samples = samples;
  mu.seed = seed;
  if (sys.is_linear()) {
    mu.hu = sys.log_unstable_volume_growth();
    mu.provenance = EntropyProvenance::Analytic;
  }
  mu.description = "Haar volume";
  return mu;
}

MeasureEntry periodic_orbit(const TorusSystem& sys, std::vector<TorusPoint> cycle) {
  if (cycle.empty()) throw Error(ErrorCode::InvalidArgument, "periodic orbit needs at least one point");
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (cycle[i].dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "orbit point dimension differs");
    const auto& next = cycle[(i + 1) % cycle.size()];
    if (torus_distance(apply_map(sys, cycle[i]), next) > 1e-9)
      throw Error(ErrorCode::InvalidArgument, "points do not form a cycle of the system map");
  }
  MeasureEntry mu;
  mu.kind = MeasureKind::PeriodicOrbit;
  mu.points = std::move(cycle);
  mu.hu = 0.0;
  mu.provenance = EntropyProvenance::Analytic;
  mu.description = fmt::format("periodic orbit of period {}", mu.points.size());
  return mu;
}

namespace {

TorusPoint with_center(const TorusPoint& p, std::size_t axis, double theta) {
  Vec c = p.coords();
  c[static_cast<Eigen::Index>(axis)] = theta;
  return TorusPoint(c);
}

double factor_distance(const TorusPoint& a, const TorusPoint& b, std::size_t axis) {
  return torus_distance(with_center(a, axis, 0.0), with_center(b, axis, 0.0));
}

}  // namespace

MeasureEntry center_circle(const TorusSystem& sys, std::vector<TorusPoint> cycle, std::size_t center_axis) {
  if (cycle.empty()) throw Error(ErrorCode::InvalidArgument, "center-circle measure needs a factor cycle");
  if (center_axis >= sys.dim()) throw Error(ErrorCode::DimensionMismatch, "center axis out of range");
  if (!sys.is_linear()) throw Error(ErrorCode::Unsupported, "center-circle measures need a linear system");
  const auto a = static_cast<Eigen::Index>(center_axis);
  for (Eigen::Index j = 0; j < sys.matrix().cols(); ++j)
    if (sys.matrix()(a, j) != (j == a ? 1 : 0) || sys.matrix()(j, a) != (j == a ? 1 : 0))
      throw Error(ErrorCode::Unsupported, "center coordinate is not an isometric rotation factor");
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (cycle[i].dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "orbit point dimension differs");
    const auto& next = cycle[(i + 1) % cycle.size()];
    for (int k = 0; k < kCircleGrid; ++k) {
      auto p = with_center(cycle[i], center_axis, static_cast<double>(k) / kCircleGrid);
      if (factor_distance(apply_map(sys, p), next, center_axis) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "points do not form a cycle of the hyperbolic factor");
    }
  }
  MeasureEntry mu;
  mu.kind = MeasureKind::CenterCircle;
  mu.points = std::move(cycle);
  mu.center_axis = center_axis;
  mu.hu = 0.0;
  mu.provenance = EntropyProvenance::AssumedZero;
  mu.description = fmt::format("factor cycle of period {} times center Lebesgue", mu.points.size());
  return mu;
}

MeasureEntry empirical_orbit(const TorusPoint& seed_point, int length) {
  if (length < 1) throw Error(ErrorCode::InvalidArgument, "empirical orbit length must be >= 1");
  MeasureEntry mu;
  mu.kind = MeasureKind::EmpiricalOrbit;
  mu.points = {seed_point};
  mu.length = length;
  mu.provenance = EntropyProvenance::Unavailable;
  mu.description = fmt::format("empirical orbit of length {}", length);
  return mu;
}

LyapunovEstimate lyapunov_functional(const PotentialSeq& g, const TorusSystem& sys, const MeasureEntry& mu,
                                     const std::vector<int>& stages, int jobs) {
  if (stages.empty()) throw Error(ErrorCode::InvalidArgument, "lyapunov functional needs at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i)
    if (stages[i] < 1 || (i && stages[i] <= stages[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "stages must be positive and increasing");

  // Every measure is reduced to a list of (point, weight) averaged per stage.
  LyapunovEstimate out;
  double last_var = 0.0;
  std::size_t last_count = 1;
  for (int requested : stages) {
    int n = requested;
    std::vector<TorusPoint> points;
    switch (mu.kind) {
      case MeasureKind::HaarVolume:
        points.resize(static_cast<std::size_t>(mu.samples));
        for (std::size_t i = 0; i < points.size(); ++i) {
          auto rng = item_rng(mu.seed, i);
          points[i] = uniform_point(rng, sys.dim());
        }
        break;
      case MeasureKind::PeriodicOrbit: {
        const int p = static_cast<int>(mu.points.size());
        n = (n + p - 1) / p * p;
        points = mu.points;
        break;
      }
      case MeasureKind::CenterCircle: {
        const int p = static_cast<int>(mu.points.size());
        n = (n + p - 1) / p * p;
        for (const auto& q : mu.points)
          for (int k = 0; k < kCircleGrid; ++k)
            points.push_back(with_center(q, mu.center_axis, static_cast<double>(k) / kCircleGrid));
        break;
      }
      case MeasureKind::EmpiricalOrbit: {
        TorusPoint x = mu.points.front();
        for (int i = 0; i < mu.length; ++i) {
          points.push_back(x);
          x = apply_map(sys, x);
        }
        break;
      }
    }
    std::vector<double> values(points.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) { values[i] = g.eval(sys, points[i], n) / n; });
    const double count = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    last_var = values.size() > 1 ? var / (count - 1.0) : 0.0;
    last_count = values.size();
    out.stages.emplace_back(n, mean);
  }
  out.value = out.stages.back().second;
  // Orbit averages are exact; only Monte Carlo carries sampling error.
  out.stderr_ = mu.kind == MeasureKind::HaarVolume ? std::sqrt(last_var / static_cast<double>(last_count)) : 0.0;
  if (out.value < kMinusInfinityFloor) {
    out.minus_infinity = true;
    out.value = kMinusInfinityFloor;
  }
  out.analytic = analytic_lyapunov(g, sys, mu);
  return out;
}

std::optional<double> analytic_lyapunov(const PotentialSeq& g, const TorusSystem& sys, const MeasureEntry& mu) {
  const auto& n = g.node();
  auto child = [&](std::size_t i) { return analytic_lyapunov(n.children[i], sys, mu); };
  switch (n.kind) {
    case PotentialKind::Constant:
      return n.value;
    case PotentialKind::CocycleNorm:
      if (sys.is_linear()) return n.value * std::log(sys.unstable_rate());
      return std::nullopt;
    case PotentialKind::AdditiveBirkhoff:
      if (mu.kind == MeasureKind::HaarVolume) {
        double mean = n.phi.constant;
        for (const auto& t : n.phi.terms)
          if (std::all_of(t.wave.begin(), t.wave.end(), [](int k) { return k == 0; })) mean += t.cos_coef;
        return mean;
      }
      if (mu.kind == MeasureKind::PeriodicOrbit) {
        double s = 0.0;
        for (const auto& p : mu.points) s += n.phi.value(p.coords());
        return s / static_cast<double>(mu.points.size());
      }
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
    case PotentialKind::CoboundaryTwist:
      return child(0);  // the telescoping term integrates to zero against invariant measures
    case PotentialKind::Stage:
      if (n.children[0].is_additive()) return child(0);
      return std::nullopt;
    case PotentialKind::Iterate:
      if (auto a = analytic_lyapunov(n.children[0], *n.base, mu)) return n.steps * *a;
      return std::nullopt;
    case PotentialKind::Max:
    case PotentialKind::Custom:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string_view measure_kind_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::HaarVolume:
      return "haar";
    case MeasureKind::PeriodicOrbit:
      return "periodic-orbit";
    case MeasureKind::CenterCircle:
      return "center-circle";
    case MeasureKind::EmpiricalOrbit:
      return "empirical-orbit";
  }
  return "unknown";
}

std::string_view provenance_name(EntropyProvenance p) {
  switch (p) {
    case EntropyProvenance::Analytic:
      return "analytic";
    case EntropyProvenance::AssumedZero:
      return "assumed-zero";
    case EntropyProvenance::Unavailable:
      return "unavailable";
  }
  return "unknown";
}

}  // namespace upress
