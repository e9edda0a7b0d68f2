#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace upress {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Floor-based reduction of a real number into [0, 1).
double reduce_unit(double x);

/// A point of the d-torus R^d / Z^d, stored with every coordinate in [0, 1).
class TorusPoint {
public:
  TorusPoint() = default;
  explicit TorusPoint(const Vec& coords);
  TorusPoint(std::initializer_list<double> coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }

private:
  Vec coords_;
};

/// Euclidean distance on the flat torus (shortest representative per coordinate).
double torus_distance(const TorusPoint& a, const TorusPoint& b);

/// Torus points are compared by distance, never by coordinates.
inline bool same_point(const TorusPoint& a, const TorusPoint& b, double tol = 1e-12) {
  return torus_distance(a, b) < tol;
}

/// Deterministic per-item generator: item `index` of a run seeded with `seed`
/// always sees the same stream, whichever thread evaluates it.
std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t index);

TorusPoint uniform_point(std::mt19937_64& rng, std::size_t dim);

}  // namespace upress
