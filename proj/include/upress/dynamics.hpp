#pragma once

#include "upress/torus.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace upress {

using IntMat = Eigen::MatrixXi;

/// One trigonometric mode a*sin(2*pi*k.x) + b*cos(2*pi*k.x). `component` picks the
/// output coordinate when the mode belongs to a vector field; scalar fields ignore it.
struct TrigTerm {
  std::size_t component = 0;
  std::vector<int> wave;
  double sin_coef = 0.0;
  double cos_coef = 0.0;

  bool operator==(const TrigTerm&) const = default;
};

/// Scalar trigonometric polynomial on the torus: constant plus a finite sum of modes.
struct TrigPolynomial {
  double constant = 0.0;
  std::vector<TrigTerm> terms;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;

  bool operator==(const TrigPolynomial&) const = default;
};

/// Periodic vector field P : T^d -> R^d given coordinatewise by trigonometric modes.
class Perturbation {
public:
  Perturbation() = default;
  explicit Perturbation(std::vector<TrigTerm> terms);

  bool empty() const { return terms_.empty(); }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  Vec value(const Vec& x) const;
  Mat jacobian(const Vec& x) const;

  /// Upper bound for sup |P|.
  double sup_bound(std::size_t dim) const;
  /// Upper bound for sup ||DP|| (Frobenius bound on the operator norm).
  double derivative_bound(std::size_t dim) const;

  bool operator==(const Perturbation&) const = default;

private:
  std::vector<TrigTerm> terms_;
};

/// Eigen-data of the linear part, grouped by bundle. Columns are unit eigenvectors.
struct Splitting {
  Mat unstable;
  Mat center;
  Mat stable;
  std::vector<double> unstable_rates;  // |eigenvalue| per unstable column
  std::vector<double> center_rates;
  std::vector<double> stable_rates;
  Mat basis;      // [unstable | center | stable]
  Mat basis_inv;  // coordinates in that basis
};

/// Partially hyperbolic candidate on the torus: x -> A x + translation + magnitude * P(x) mod 1.
/// With no perturbation this is an affine toral automorphism (the linear systems).
class TorusSystem {
public:
  TorusSystem(IntMat matrix, Vec translation, Perturbation perturbation = {}, double magnitude = 0.0,
              std::string name = {});

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const IntMat& matrix() const { return matrix_; }
  const Vec& translation() const { return translation_; }
  const Perturbation& perturbation() const { return perturbation_; }
  double magnitude() const { return magnitude_; }
  const std::string& name() const { return name_; }
  const Splitting& splitting() const { return splitting_; }

  bool has_perturbation() const { return !perturbation_.empty(); }
  bool is_linear() const { return perturbation_.empty() || magnitude_ == 0.0; }

  std::size_t unstable_dim() const { return splitting_.unstable_rates.size(); }
  /// The single expansion rate of E^u; throws Unsupported unless dim E^u = 1.
  double unstable_rate() const;
  /// Sum of log unstable rates (the unstable entropy of volume for the linear part).
  double log_unstable_volume_growth() const;

  /// Lift of the map to R^d (no reduction): A z + translation + magnitude * P(z).
  Vec lift(const Vec& z) const;
  Mat jacobian(const Vec& z) const;
  /// Some z with lift(z) = w, by Newton iteration from the linear inverse.
  Vec lift_inverse(const Vec& w) const;

  /// Right-hand side of the cone-preservation condition: (lambda - 1) / 4.
  double cone_threshold() const;
  /// magnitude * (1 + derivative bound), compared against cone_threshold().
  double cone_load() const;
  bool within_cone_threshold() const { return cone_load() < cone_threshold(); }

  /// k-th iterate of a linear system (matrix A^k, accumulated translation).
  TorusSystem power(int k) const;

private:
  IntMat matrix_;
  Vec translation_;
  Perturbation perturbation_;
  double magnitude_ = 0.0;
  std::string name_;
  Splitting splitting_;
  Mat matrix_d_;
  Mat matrix_inv_;
};

inline const double kGoldenRotation = 0.6180339887498949;  // (sqrt 5 - 1) / 2

TorusSystem cat_map();
TorusSystem cat_rotation(double alpha = kGoldenRotation);
TorusSystem circle_rotation(double alpha = kGoldenRotation);
/// Smooth three-term field coupling the hyperbolic and center coordinates of cat x rotation.
Perturbation default_perturbation();
TorusSystem perturbed_cat_rotation(double magnitude, double alpha = kGoldenRotation);

TorusPoint apply_map(const TorusSystem& sys, const TorusPoint& p);
TorusPoint apply_iterate(const TorusSystem& sys, const TorusPoint& p, int n);

/// Unit vector spanning E^u at p. Linear systems return the eigenvector; perturbed systems
/// push the linear direction forward along the backward orbit and throw FrameNotReady if the
/// direction has not settled.
Vec unstable_direction(const TorusSystem& sys, const TorusPoint& p);

/// ||D_p f^n restricted to E^u||, as a product of one-step restricted norms.
double unstable_cocycle_norm(const TorusSystem& sys, const TorusPoint& p, int n);
double log_unstable_cocycle_norm(const TorusSystem& sys, const TorusPoint& p, int n);

struct BundleFrames {
  Mat unstable;
  Mat center;
  Mat stable;
};

/// Orthonormal bases of E^u, E^c, E^s at p.
BundleFrames invariant_frames(const TorusSystem& sys, const TorusPoint& p);

struct NormRange {
  double min = 0.0;
  double max = 0.0;
};

struct HyperbolicityReport {
  int samples = 0;
  std::uint64_t seed = 0;
  bool has_unstable = false;
  NormRange stable;
  NormRange center;
  NormRange unstable;
  double max_inverse_unstable = 0.0;
  bool chain_holds = false;        // ||Df v^s|| < ||Df v^c|| < ||Df v^u||
  bool stable_contracts = false;   // ||Df v^s|| < 1
  bool unstable_expands = false;   // ||Df^-1 v^u|| < 1
  bool pass = false;
};

HyperbolicityReport verify_partial_hyperbolicity(const TorusSystem& sys, int samples, std::uint64_t seed = 1);

/// Samples the Jacobian determinant; true when its sign never changes (local injectivity).
bool jacobian_sign_consistent(const TorusSystem& sys, int samples, std::uint64_t seed = 1);

}  // namespace upress
