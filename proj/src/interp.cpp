#include "upress/interp.hpp"

#include "upress/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace upress {

std::vector<double> chebyshev_nodes(std::size_t count, double half_width) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two nodes");
  std::vector<double> nodes(count);
  const double n = static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    nodes[k] = -half_width * std::cos(std::numbers::pi * static_cast<double>(k) / n);
  nodes.front() = -half_width;
  nodes.back() = half_width;
  if (count % 2 == 1) nodes[count / 2] = 0.0;
  return nodes;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two grid points");
  std::vector<double> out(count);
  const double n = static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    double t = static_cast<double>(k) / n;
    out[k] = lo * (1.0 - t) + hi * t;
  }
  out.back() = hi;
  return out;
}

CubicSample local_cubic(std::span<const double> nodes, std::span<const double> values, double x) {
  const std::size_t n = nodes.size();
  if (n < 4 || values.size() != n) throw Error(ErrorCode::InvalidArgument, "cubic interpolation needs >= 4 nodes");
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t right = static_cast<std::size_t>(it - nodes.begin());
  // stencil [first, first+3] around the cell containing x
  std::size_t first = right >= 2 ? right - 2 : 0;
  first = std::min(first, n - 4);

  CubicSample out;
  for (std::size_t i = 0; i < 4; ++i) {
    const double xi = nodes[first + i];
    double basis = 1.0, slope = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j == i) continue;
      const double xj = nodes[first + j];
      basis *= (x - xj) / (xi - xj);
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (k == i) continue;
      double term = 1.0 / (xi - nodes[first + k]);
      for (std::size_t j = 0; j < 4; ++j) {
        if (j == i || j == k) continue;
        term *= (x - nodes[first + j]) / (xi - nodes[first + j]);
      }
      slope += term;
    }
    out.value += values[first + i] * basis;
    out.slope += values[first + i] * slope;
  }
  return out;
}

ArclengthTable::ArclengthTable(double lo, double hi, std::vector<double> speeds) : lo_(lo), hi_(hi) {
  if (speeds.size() < 3 || speeds.size() % 2 == 0 || !(hi > lo))
    throw Error(ErrorCode::InvalidArgument, "arclength table needs 2*cells+1 speed samples");
  const std::size_t cells = (speeds.size() - 1) / 2;
  step_ = (hi - lo) / static_cast<double>(cells);
  cumulative_.assign(cells + 1, 0.0);
  node_speed_.resize(cells + 1);
  min_speed_ = *std::min_element(speeds.begin(), speeds.end());
  for (std::size_t k = 0; k <= cells; ++k) node_speed_[k] = speeds[2 * k];
  for (std::size_t k = 0; k < cells; ++k) {
    const double simpson = step_ / 6.0 * (speeds[2 * k] + 4.0 * speeds[2 * k + 1] + speeds[2 * k + 2]);
    cumulative_[k + 1] = cumulative_[k] + simpson;
  }
  if (lo <= 0.0 && hi >= 0.0) {
    // shift so that L(0) = 0 exactly
    const double zero = (*this)(0.0);
    for (auto& c : cumulative_) c -= zero;
  }
}

double ArclengthTable::operator()(double s) const {
  const std::size_t cells = cumulative_.size() - 1;
  double t = (s - lo_) / step_;
  std::size_t k = t <= 0.0 ? 0 : std::min(cells - 1, static_cast<std::size_t>(t));
  const double u = t - static_cast<double>(k);
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * cumulative_[k] + h10 * step_ * node_speed_[k] + h01 * cumulative_[k + 1] +
         h11 * step_ * node_speed_[k + 1];
}

ArclengthTable make_arclength_table(double lo, double hi, std::size_t cells,
                                    const std::function<double(double)>& speed) {
  std::vector<double> speeds(2 * cells + 1);
  const double half = (hi - lo) / static_cast<double>(2 * cells);
  for (std::size_t k = 0; k < speeds.size(); ++k) speeds[k] = speed(lo + half * static_cast<double>(k));
  return ArclengthTable(lo, hi, std::move(speeds));
}

}  // namespace upress
