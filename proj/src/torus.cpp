#include "upress/torus.hpp"

#include "upress/error.hpp"

#include <cmath>

namespace upress {

std::string_view reason(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Config: return "config-invalid";
    case ErrorCode::UnderResolved: return "under-resolved";
    case ErrorCode::Radius: return "radius";
    case ErrorCode::Depth: return "depth";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::FrameNotReady: return "frame-not-ready";
    case ErrorCode::UnsupportedStructure: return "unsupported-structure";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::TooLarge: return "too-large";
    case ErrorCode::ParameterOutOfRange: return "parameter-out-of-range";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NotProbability: return "not-probability";
    case ErrorCode::CheckFailed: return "check-failed";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

double reduce_unit(double x) {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.0
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint::TorusPoint(const Vec& coords) : coords_(coords) {
  for (Eigen::Index i = 0; i < coords_.size(); ++i) coords_[i] = reduce_unit(coords_[i]);
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(Eigen::Map<const Vec>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "torus points of different dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = std::abs(a[i] - b[i]);
    d = std::min(d, 1.0 - d);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

TorusPoint uniform_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(static_cast<Eigen::Index>(dim));
  for (auto& c : v) c = u(rng);
  return TorusPoint(v);
}

}  // namespace upress
