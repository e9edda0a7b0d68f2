#include "upress/dynamics.hpp"

#include "upress/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace upress {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRateTol = 1e-9;
constexpr int kFrameSteps = 30;
constexpr int kFrameCheckSteps = 42;
constexpr double kFrameTol = 1e-10;

double phase(const std::vector<int>& wave, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < wave.size() && i < static_cast<std::size_t>(x.size()); ++i)
    s += wave[i] * x[static_cast<Eigen::Index>(i)];
  return kTwoPi * s;
}

double wave_norm(const std::vector<int>& wave) {
  double s = 0.0;
  for (int k : wave) s += double(k) * k;
  return std::sqrt(s);
}

Mat orthonormalize(const Mat& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

Mat columns_normalized(const Mat& m) {
  Mat out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j).normalize();
    // first clearly nonzero component positive
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (std::abs(out(i, j)) > 1e-12) {
        if (out(i, j) < 0) out.col(j) *= -1.0;
        break;
      }
    }
  }
  return out;
}

Splitting compute_splitting(const Mat& a) {
  Eigen::EigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::Unsupported, "eigen decomposition failed");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const auto n = a.rows();

  std::vector<Eigen::Index> u, c, s;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values[i].imag()) > 1e-12)
      throw Error(ErrorCode::Unsupported, "complex spectrum is not supported");
    double r = std::abs(values[i].real());
    if (r > 1.0 + kRateTol) u.push_back(i);
    else if (r < 1.0 - kRateTol) s.push_back(i);
    else c.push_back(i);
  }
  // strongest expansion first, strongest contraction last
  auto by_rate = [&](Eigen::Index x, Eigen::Index y) { return std::abs(values[x].real()) > std::abs(values[y].real()); };
  std::sort(u.begin(), u.end(), by_rate);
  std::sort(s.begin(), s.end(), by_rate);

  auto collect = [&](const std::vector<Eigen::Index>& idx, Mat& cols, std::vector<double>& rates) {
    cols.resize(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      cols.col(static_cast<Eigen::Index>(k)) = vectors.col(idx[k]).real();
      rates.push_back(std::abs(values[idx[k]].real()));
    }
    cols = columns_normalized(cols);
  };

  Splitting sp;
  collect(u, sp.unstable, sp.unstable_rates);
  collect(c, sp.center, sp.center_rates);
  collect(s, sp.stable, sp.stable_rates);
  sp.basis.resize(n, n);
  sp.basis << sp.unstable, sp.center, sp.stable;
  Eigen::FullPivLU<Mat> lu(sp.basis);
  if (!lu.isInvertible()) throw Error(ErrorCode::Unsupported, "matrix is not diagonalizable over the reals");
  sp.basis_inv = lu.inverse();
  return sp;
}

// orbit[0] = p, orbit[j] = f^{-j}(p), each reduced mod 1
std::vector<Vec> backward_orbit(const TorusSystem& sys, const Vec& p, int steps) {
  std::vector<Vec> orbit{p};
  orbit.reserve(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j < steps; ++j) orbit.push_back(TorusPoint(sys.lift_inverse(orbit.back())).coords());
  return orbit;
}

std::vector<Vec> forward_orbit(const TorusSystem& sys, const Vec& p, int steps) {
  std::vector<Vec> orbit{p};
  orbit.reserve(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j < steps; ++j) orbit.push_back(TorusPoint(sys.lift(orbit.back())).coords());
  return orbit;
}

// Pushes a subspace living at orbit[steps] forward to orbit[0] along a backward orbit.
Mat push_forward(const TorusSystem& sys, const std::vector<Vec>& back, Mat basis, int steps) {
  for (int j = steps; j >= 1; --j) basis = orthonormalize(sys.jacobian(back[static_cast<std::size_t>(j)]) * basis);
  return basis;
}

// Pulls a subspace living at orbit[steps] back to orbit[0] along a forward orbit.
Mat pull_back(const TorusSystem& sys, const std::vector<Vec>& fwd, Mat basis, int steps) {
  for (int j = steps - 1; j >= 0; --j)
    basis = orthonormalize(sys.jacobian(fwd[static_cast<std::size_t>(j)]).partialPivLu().solve(basis));
  return basis;
}

Mat intersect(const Mat& a, const Mat& b, Eigen::Index dim) {
  if (dim == 0) return Mat(a.rows(), 0);
  Mat m(a.rows(), a.cols() + b.cols());
  m << a, -b;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Mat& v = svd.matrixV();
  Mat coeffs = v.rightCols(dim).topRows(a.cols());
  return orthonormalize(a * coeffs);
}

}  // namespace

double TrigPolynomial::value(const Vec& x) const {
  double v = constant;
  for (const auto& t : terms) {
    double ph = phase(t.wave, x);
    v += t.sin_coef * std::sin(ph) + t.cos_coef * std::cos(ph);
  }
  return v;
}

Vec TrigPolynomial::gradient(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  for (const auto& t : terms) {
    double ph = phase(t.wave, x);
    double d = kTwoPi * (t.sin_coef * std::cos(ph) - t.cos_coef * std::sin(ph));
    for (std::size_t i = 0; i < t.wave.size() && i < static_cast<std::size_t>(x.size()); ++i)
      g[static_cast<Eigen::Index>(i)] += d * t.wave[i];
  }
  return g;
}

Perturbation::Perturbation(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

Vec Perturbation::value(const Vec& x) const {
  Vec v = Vec::Zero(x.size());
  for (const auto& t : terms_) {
    double ph = phase(t.wave, x);
    v[static_cast<Eigen::Index>(t.component)] += t.sin_coef * std::sin(ph) + t.cos_coef * std::cos(ph);
  }
  return v;
}

Mat Perturbation::jacobian(const Vec& x) const {
  Mat j = Mat::Zero(x.size(), x.size());
  for (const auto& t : terms_) {
    double ph = phase(t.wave, x);
    double d = kTwoPi * (t.sin_coef * std::cos(ph) - t.cos_coef * std::sin(ph));
    for (std::size_t i = 0; i < t.wave.size() && i < static_cast<std::size_t>(x.size()); ++i)
      j(static_cast<Eigen::Index>(t.component), static_cast<Eigen::Index>(i)) += d * t.wave[i];
  }
  return j;
}

double Perturbation::sup_bound(std::size_t dim) const {
  std::vector<double> per(dim, 0.0);
  for (const auto& t : terms_) per.at(t.component) += std::abs(t.sin_coef) + std::abs(t.cos_coef);
  double s = 0.0;
  for (double v : per) s += v * v;
  return std::sqrt(s);
}

double Perturbation::derivative_bound(std::size_t dim) const {
  std::vector<double> per(dim, 0.0);
  for (const auto& t : terms_)
    per.at(t.component) += kTwoPi * (std::abs(t.sin_coef) + std::abs(t.cos_coef)) * wave_norm(t.wave);
  double s = 0.0;
  for (double v : per) s += v * v;
  return std::sqrt(s);
}

TorusSystem::TorusSystem(IntMat matrix, Vec translation, Perturbation perturbation, double magnitude,
                         std::string name)
    : matrix_(std::move(matrix)),
      translation_(std::move(translation)),
      perturbation_(std::move(perturbation)),
      magnitude_(magnitude),
      name_(std::move(name)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols())
    throw Error(ErrorCode::InvalidArgument, "system matrix must be square and non-empty");
  if (translation_.size() != matrix_.rows())
    throw Error(ErrorCode::DimensionMismatch, "translation length does not match matrix size");
  if (!(magnitude_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation magnitude must be >= 0");
  for (const auto& t : perturbation_.terms()) {
    if (t.component >= dim() || t.wave.size() != dim())
      throw Error(ErrorCode::DimensionMismatch, "perturbation term does not match system dimension");
  }
  matrix_d_ = matrix_.cast<double>();
  double det = matrix_d_.determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "system matrix must have determinant +-1");
  matrix_inv_ = matrix_d_.inverse();
  splitting_ = compute_splitting(matrix_d_);
}

double TorusSystem::unstable_rate() const {
  if (unstable_dim() != 1) throw Error(ErrorCode::Unsupported, "exactly one unstable direction is required");
  return splitting_.unstable_rates.front();
}

double TorusSystem::log_unstable_volume_growth() const {
  double s = 0.0;
  for (double r : splitting_.unstable_rates) s += std::log(r);
  return s;
}

Vec TorusSystem::lift(const Vec& z) const {
  Vec w = matrix_d_ * z + translation_;
  if (has_perturbation() && magnitude_ != 0.0) w += magnitude_ * perturbation_.value(z);
  return w;
}

Mat TorusSystem::jacobian(const Vec& z) const {
  if (!has_perturbation() || magnitude_ == 0.0) return matrix_d_;
  return matrix_d_ + magnitude_ * perturbation_.jacobian(z);
}

Vec TorusSystem::lift_inverse(const Vec& w) const {
  Vec z = matrix_inv_ * (w - translation_);
  if (is_linear()) return z;
  for (int it = 0; it < 50; ++it) {
    Vec r = lift(z) - w;
    if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
    z -= jacobian(z).partialPivLu().solve(r);
  }
  return z;
}

double TorusSystem::cone_threshold() const {
  return (unstable_rate() - 1.0) / 4.0;
}

double TorusSystem::cone_load() const {
  if (!has_perturbation()) return 0.0;
  return magnitude_ * (1.0 + perturbation_.derivative_bound(dim()));
}

TorusSystem TorusSystem::power(int k) const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "iterate power must be >= 1");
  if (!is_linear()) throw Error(ErrorCode::Unsupported, "iterates are only built for linear systems");
  IntMat a = IntMat::Identity(matrix_.rows(), matrix_.cols());
  Vec t = Vec::Zero(translation_.size());
  for (int i = 0; i < k; ++i) {
    t += a.cast<double>() * translation_;
    a = matrix_ * a;
  }
  return TorusSystem(a, t, {}, 0.0, name_ + "^" + std::to_string(k));
}

TorusSystem cat_map() {
  IntMat a(2, 2);
  a << 2, 1, 1, 1;
  return TorusSystem(a, Vec::Zero(2), {}, 0.0, "cat");
}

TorusSystem cat_rotation(double alpha) {
  IntMat a(3, 3);
  a << 2, 1, 0, 1, 1, 0, 0, 0, 1;
  Vec t(3);
  t << 0.0, 0.0, alpha;
  return TorusSystem(a, t, {}, 0.0, "cat-rotation");
}

TorusSystem circle_rotation(double alpha) {
  IntMat a(1, 1);
  a << 1;
  Vec t(1);
  t << alpha;
  return TorusSystem(a, t, {}, 0.0, "rotation");
}

Perturbation default_perturbation() {
  const double c = 1.0 / kTwoPi;
  return Perturbation({
      TrigTerm{0, {0, 1, 0}, c, 0.0},
      TrigTerm{1, {1, 0, 1}, 0.0, c},
      TrigTerm{2, {1, 0, 0}, c, 0.0},
  });
}

TorusSystem perturbed_cat_rotation(double magnitude, double alpha) {
  auto base = cat_rotation(alpha);
  return TorusSystem(base.matrix(), base.translation(), default_perturbation(), magnitude, "cat-rotation-perturbed");
}

TorusPoint apply_map(const TorusSystem& sys, const TorusPoint& p) {
  return TorusPoint(sys.lift(p.coords()));
}

TorusPoint apply_iterate(const TorusSystem& sys, const TorusPoint& p, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "iterate count must be >= 0");
  TorusPoint q = p;
  for (int i = 0; i < n; ++i) q = apply_map(sys, q);
  return q;
}

Vec unstable_direction(const TorusSystem& sys, const TorusPoint& p) {
  const Vec& linear = sys.splitting().unstable.col(0);
  if (sys.unstable_dim() != 1) throw Error(ErrorCode::Unsupported, "exactly one unstable direction is required");
  if (sys.is_linear()) return linear;
  auto back = backward_orbit(sys, p.coords(), kFrameCheckSteps);
  Vec a = push_forward(sys, back, linear, kFrameSteps).col(0);
  Vec b = push_forward(sys, back, linear, kFrameCheckSteps).col(0);
  if (a.dot(linear) < 0) a = -a;
  if (b.dot(linear) < 0) b = -b;
  if ((a - b).norm() > kFrameTol)
    throw Error(ErrorCode::FrameNotReady, "unstable direction did not settle along the backward orbit");
  return b;
}

double log_unstable_cocycle_norm(const TorusSystem& sys, const TorusPoint& p, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "cocycle length must be >= 1");
  if (sys.is_linear()) return n * std::log(sys.unstable_rate());
  Vec e = unstable_direction(sys, p);
  Vec x = p.coords();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec v = sys.jacobian(x) * e;
    double norm = v.norm();
    s += std::log(norm);
    e = v / norm;
    x = TorusPoint(sys.lift(x)).coords();
  }
  return s;
}

double unstable_cocycle_norm(const TorusSystem& sys, const TorusPoint& p, int n) {
  if (sys.is_linear()) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "cocycle length must be >= 1");
    return std::pow(sys.unstable_rate(), n);
  }
  return std::exp(log_unstable_cocycle_norm(sys, p, n));
}

BundleFrames invariant_frames(const TorusSystem& sys, const TorusPoint& p) {
  const auto& sp = sys.splitting();
  if (sys.is_linear())
    return {orthonormalize(sp.unstable), orthonormalize(sp.center), orthonormalize(sp.stable)};

  auto back = backward_orbit(sys, p.coords(), kFrameSteps);
  auto fwd = forward_orbit(sys, p.coords(), kFrameSteps);
  Mat cu(sys.dim(), sp.unstable.cols() + sp.center.cols());
  cu << sp.unstable, sp.center;
  Mat cs(sys.dim(), sp.center.cols() + sp.stable.cols());
  cs << sp.center, sp.stable;

  BundleFrames f;
  f.unstable = sp.unstable.cols() ? push_forward(sys, back, sp.unstable, kFrameSteps) : sp.unstable;
  f.stable = sp.stable.cols() ? pull_back(sys, fwd, sp.stable, kFrameSteps) : sp.stable;
  if (sp.center.cols()) {
    Mat ecu = push_forward(sys, back, cu, kFrameSteps);
    Mat ecs = pull_back(sys, fwd, cs, kFrameSteps);
    f.center = intersect(ecu, ecs, sp.center.cols());
  } else {
    f.center = sp.center;
  }
  return f;
}

HyperbolicityReport verify_partial_hyperbolicity(const TorusSystem& sys, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  HyperbolicityReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.has_unstable = sys.unstable_dim() > 0;

  constexpr double inf = std::numeric_limits<double>::infinity();
  NormRange s{inf, -inf}, c{inf, -inf}, u{inf, -inf};
  double inv_u = 0.0;
  auto update = [](NormRange& r, double v) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  };
  const auto d = sys.dim();
  for (int i = 0; i < samples; ++i) {
    auto rng = item_rng(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    TorusPoint x = uniform_point(rng, d);
    BundleFrames f = invariant_frames(sys, x);
    Mat jac = sys.jacobian(x.coords());
    auto random_unit = [&](const Mat& basis) {
      Vec coeff(basis.cols());
      for (auto& v : coeff) v = normal(rng);
      Vec v = basis * coeff;
      return Vec(v / v.norm());
    };
    if (f.stable.cols()) update(s, (jac * random_unit(f.stable)).norm());
    if (f.center.cols()) update(c, (jac * random_unit(f.center)).norm());
    if (f.unstable.cols()) {
      Vec vu = random_unit(f.unstable);
      update(u, (jac * vu).norm());
      Mat jprev = sys.jacobian(sys.lift_inverse(x.coords()));
      inv_u = std::max(inv_u, jprev.partialPivLu().solve(vu).norm());
    }
  }
  auto finish = [](NormRange r) { return std::isfinite(r.min) ? r : NormRange{}; };
  rep.stable = finish(s);
  rep.center = finish(c);
  rep.unstable = finish(u);
  rep.max_inverse_unstable = inv_u;

  const auto& sp = sys.splitting();
  bool has_s = sp.stable.cols() > 0, has_c = sp.center.cols() > 0;
  if (!rep.has_unstable) return rep;

  bool chain = true;
  if (has_s && has_c) chain = chain && rep.stable.max < rep.center.min;
  if (has_c) chain = chain && rep.center.max < rep.unstable.min;
  else if (has_s) chain = chain && rep.stable.max < rep.unstable.min;
  rep.chain_holds = chain;
  rep.stable_contracts = !has_s || rep.stable.max < 1.0;
  rep.unstable_expands = rep.max_inverse_unstable < 1.0;
  rep.pass = rep.chain_holds && rep.stable_contracts && rep.unstable_expands;
  return rep;
}

bool jacobian_sign_consistent(const TorusSystem& sys, int samples, std::uint64_t seed) {
  const double ref = sys.matrix().cast<double>().determinant();
  for (int i = 0; i < samples; ++i) {
    auto rng = item_rng(seed, static_cast<std::uint64_t>(i));
    TorusPoint x = uniform_point(rng, sys.dim());
    if (sys.jacobian(x.coords()).determinant() * ref <= 0.0) return false;
  }
  return true;
}

}  // namespace upress
