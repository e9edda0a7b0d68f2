#pragma once

#include <functional>
#include <span>
#include <vector>

namespace upress {

/// Chebyshev-Lobatto nodes mapped onto [-half_width, half_width], ascending. Odd counts include 0.
std::vector<double> chebyshev_nodes(std::size_t count, double half_width);

/// Uniform grid of `count` points spanning [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Piecewise-cubic interpolation through the four nodes nearest to x (local Lagrange cubic).
/// Nodes must be strictly increasing; x outside the node range extrapolates from the end cubic.
struct CubicSample {
  double value = 0.0;
  double slope = 0.0;
};
CubicSample local_cubic(std::span<const double> nodes, std::span<const double> values, double x);

/// Cumulative arclength L(s) of a curve with speed sigma(s) on [lo, hi], tabulated on a uniform
/// grid (Simpson per cell using midpoint speeds) and evaluated by cubic Hermite interpolation
/// with the exact speeds as slopes. L(0) = 0 when 0 lies in the range.
class ArclengthTable {
public:
  ArclengthTable() = default;
  /// `speeds` holds 2*cells+1 values at lo + k*h/2.
  ArclengthTable(double lo, double hi, std::vector<double> speeds);

  double operator()(double s) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t cells() const { return cumulative_.empty() ? 0 : cumulative_.size() - 1; }
  double min_speed() const { return min_speed_; }

private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cumulative_;  // at grid nodes
  std::vector<double> node_speed_;
  double min_speed_ = 0.0;
};

/// Builds the table by sampling `speed` at 2*cells+1 half-grid points.
ArclengthTable make_arclength_table(double lo, double hi, std::size_t cells,
                                    const std::function<double(double)>& speed);

}  // namespace upress
