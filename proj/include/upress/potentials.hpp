#pragma once

#include "upress/dynamics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace upress {

/// Lazily extended forward orbit x, f(x), f^2(x), ... with the unstable direction carried along.
/// Points are stored reduced mod 1.
class Orbit {
public:
  /// `unstable` is a known E^u direction at x; it is computed on first use otherwise.
  Orbit(const TorusSystem& sys, const TorusPoint& x, std::optional<Vec> unstable = std::nullopt);

  const TorusSystem& system() const { return *sys_; }
  const Vec& point(int i);
  /// log ||D f restricted to E^u|| at f^i(x).
  double log_unstable_step(int i);
  /// Unit E^u direction at f^i(x).
  const Vec& direction(int i);

private:
  const TorusSystem* sys_;
  std::vector<Vec> points_;
  std::vector<Vec> directions_;
  std::vector<double> log_steps_;
};

enum class PotentialKind {
  AdditiveBirkhoff,
  CocycleNorm,
  Constant,
  Sum,
  Scale,
  Shift,
  CoboundaryTwist,
  Max,
  Stage,
  Iterate,
  Custom,
};

/// log g_n(x) supplied directly; used for hand-built sequences.
using CustomPotential = std::function<double(const TorusSystem&, const TorusPoint&, int)>;

/// Sequence G = {log g_n} of continuous functions with g_n > 0 and log g_0 = 0. Values are
/// immutable and cheap to copy (shared expression tree).
class PotentialSeq {
public:
  /// log g_n = sum_{i<n} phi(f^i x).
  static PotentialSeq birkhoff(TrigPolynomial phi);
  /// log g_n = t log ||D_x f^n restricted to E^u||.
  static PotentialSeq cocycle_norm(double t);
  /// log g_n = n c.
  static PotentialSeq constant(double c);
  static PotentialSeq sum(PotentialSeq g, PotentialSeq h);
  /// log g_n -> c log g_n, c >= 0.
  static PotentialSeq scale(double c, PotentialSeq g);
  /// log g_n -> log g_n + n c.
  static PotentialSeq shift(double c, PotentialSeq g);
  /// G + H o f - H for additive H: log g_n + h_n(f x) - h_n(x).
  static PotentialSeq coboundary_twist(PotentialSeq g, PotentialSeq h);
  /// log g_n -> max(log g_n, log h_n).
  static PotentialSeq max(PotentialSeq g, PotentialSeq h);
  /// Additive potential with phi = (log g_l)/l: sum_{i<n} log g_l(f^i x) / l.
  static PotentialSeq stage(PotentialSeq g, int l);
  /// The k-step subsequence {log g_{kn}} as a potential of f^k; `base` is f.
  static PotentialSeq iterate(PotentialSeq g, int k, TorusSystem base);
  static PotentialSeq custom(std::string label, CustomPotential fn);

  PotentialKind kind() const;
  /// True when log g_{m+n} = log g_n + log g_m o f^n holds identically.
  bool is_additive() const;
  std::string describe() const;

  double eval(const TorusSystem& sys, const TorusPoint& x, int n) const;
  /// log g_n(f^start x) along a cached orbit.
  double eval(Orbit& orbit, int start, int n) const;

  struct Node;
  const Node& node() const { return *node_; }

private:
  explicit PotentialSeq(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct PotentialSeq::Node {
  PotentialKind kind;
  double value = 0.0;  // exponent, constant or factor
  int steps = 0;       // stage length or iterate power
  TrigPolynomial phi;
  std::vector<PotentialSeq> children;
  std::shared_ptr<const TorusSystem> base;
  std::string label;
  CustomPotential custom;
};

double eval_log_gn(const PotentialSeq& g, const TorusSystem& sys, const TorusPoint& x, int n);

struct SubadditivityReport {
  int trials = 0;
  int max_n = 0;
  std::uint64_t seed = 0;
  double max_violation = 0.0;  // max of log g_{m+n} - log g_n - log g_m o f^n, floored at 0
  std::optional<double> max_equality_defect;  // additive potentials only
  bool pass = false;
};

/// Audits log g_{m+n}(x) <= log g_n(x) + log g_m(f^n x) + 1e-9 on random (x, n, m), n + m <= max_n.
SubadditivityReport check_subadditivity(const PotentialSeq& g, const TorusSystem& sys, int trials, int max_n,
                                        std::uint64_t seed = 11);

enum class MeasureKind { HaarVolume, PeriodicOrbit, CenterCircle, EmpiricalOrbit };
enum class EntropyProvenance { Analytic, AssumedZero, Unavailable };

/// An invariant measure of the registry together with its unstable metric entropy.
struct MeasureEntry {
  MeasureKind kind = MeasureKind::HaarVolume;
  /// PeriodicOrbit: the cycle. CenterCircle: a cycle of the hyperbolic factor (center coordinate
  /// ignored). EmpiricalOrbit: the seed point.
  std::vector<TorusPoint> points;
  std::size_t center_axis = 0;  // CenterCircle only
  int length = 0;               // EmpiricalOrbit only
  double hu = 0.0;
  EntropyProvenance provenance = EntropyProvenance::Unavailable;
  std::string description;
  int samples = 2000;  // HaarVolume Monte Carlo sample count
  std::uint64_t seed = 1;

  bool certified() const { return provenance != EntropyProvenance::Unavailable; }
};

inline constexpr int kCircleGrid = 64;

/// Lebesgue measure; hu = sum of log unstable rates (analytic on linear systems only).
MeasureEntry haar_measure(const TorusSystem& sys, int samples = 2000, std::uint64_t seed = 1);
/// Uniform measure on a cycle, verified to tolerance 1e-9; hu = 0.
MeasureEntry periodic_orbit(const TorusSystem& sys, std::vector<TorusPoint> cycle);
/// (uniform on a hyperbolic-factor cycle) x (Lebesgue on the center circle) for linear systems whose
/// center coordinate is an isometric rotation. Verified on the circle grid; hu = 0.
MeasureEntry center_circle(const TorusSystem& sys, std::vector<TorusPoint> cycle, std::size_t center_axis);
/// Time average along a finite orbit; its entropy is not available, so it is never certified.
MeasureEntry empirical_orbit(const TorusPoint& seed_point, int length);

inline constexpr double kMinusInfinityFloor = -1e6;

struct LyapunovEstimate {
  double value = 0.0;
  bool minus_infinity = false;  // sentinel for G_+(mu) = -infinity
  double stderr_ = 0.0;
  std::vector<std::pair<int, double>> stages;  // (n, (1/n) mean log g_n)
  std::optional<double> analytic;
};

/// G_+(mu) from stage means (1/n) int log g_n dmu. Haar uses seeded Monte Carlo with the
/// measure's sample count; orbit measures are averaged exactly with n rounded up to a multiple
/// of the period.
LyapunovEstimate lyapunov_functional(const PotentialSeq& g, const TorusSystem& sys, const MeasureEntry& mu,
                                     const std::vector<int>& stages, int jobs = 1);

/// Closed-form G_+(mu) where the potential algebra determines it.
std::optional<double> analytic_lyapunov(const PotentialSeq& g, const TorusSystem& sys, const MeasureEntry& mu);

std::string_view measure_kind_name(MeasureKind kind);
std::string_view provenance_name(EntropyProvenance p);

}  // namespace upress
