#include "upress/dynamics.hpp"
#include "upress/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace upress;

namespace {

// Root of t^2 - 3t + 1 = 0, the characteristic polynomial of [[2,1],[1,1]].
const double kLambda = (3.0 + std::sqrt(5.0)) / 2.0;

// Independent oracle: integer matrix action and rotation, reduced mod 1.
TorusPoint catrot_oracle(const TorusPoint& p, double alpha) {
  const double x = p[0], y = p[1], z = p[2];
  return TorusPoint{2 * x + y, x + y, z + alpha};
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("cat map on points of the torus") {
    const auto f = cat_map();
    CHECK(same_point(apply_map(f, TorusPoint{0.5, 0.5}), TorusPoint{0.5, 0.0}));
    CHECK(same_point(apply_map(f, TorusPoint{0.0, 0.0}), TorusPoint{0.0, 0.0}));
    CHECK(same_point(apply_iterate(f, TorusPoint{0.0, 0.0}, 7), TorusPoint{0.0, 0.0}));
    const TorusPoint p{0.5, 0.5};
    CHECK(same_point(apply_iterate(f, p, 0), p));
    CHECK(same_point(apply_iterate(f, p, 2), apply_map(f, apply_map(f, p))));
  }

  TEST_CASE("reduced coordinates stay in [0, 1)") {
    CHECK(reduce_unit(-1e-18) < 1.0);
    CHECK(reduce_unit(-1e-18) >= 0.0);
    CHECK(reduce_unit(2.25) == doctest::Approx(0.25));
    CHECK(torus_distance(TorusPoint{0.999999999999}, TorusPoint{0.0}) < 1e-11);
  }

  TEST_CASE("cat x rotation matches the matrix oracle") {
    const auto f = cat_rotation();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      const auto p = uniform_point(rng, 3);
      CHECK(torus_distance(apply_map(f, p), catrot_oracle(p, kGoldenRotation)) < 1e-12);
    }
  }

  TEST_CASE("zero magnitude perturbation leaves the base system unchanged") {
    const auto base = cat_rotation();
    const auto zero = perturbed_cat_rotation(0.0);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const auto p = uniform_point(rng, 3);
      CHECK(torus_distance(apply_map(base, p), apply_map(zero, p)) < 1e-15);
    }
    for (int i = 0; i < 50; ++i) {
      const auto p = uniform_point(rng, 3);
      CHECK(std::abs(unstable_cocycle_norm(zero, p, 5) - unstable_cocycle_norm(base, p, 5)) <
            1e-12 * std::pow(kLambda, 5));
    }
  }

  TEST_CASE("iterates compose") {
    const auto f = cat_rotation();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
      const auto p = uniform_point(rng, 3);
      const int n = static_cast<int>(rng() % 21), m = static_cast<int>(rng() % 21);
      // Mod-1 reduction after each step amplifies rounding by up to lambda^(n+m).
      const double tol = 1e-15 * std::pow(kLambda, n + m) + 1e-12;
      CHECK(torus_distance(apply_iterate(f, p, n + m), apply_iterate(f, apply_iterate(f, p, n), m)) < tol);
    }
  }

  TEST_CASE("unstable cocycle norm on linear systems") {
    const auto f = cat_map();
    CHECK(unstable_cocycle_norm(f, TorusPoint{0.1, 0.7}, 3) == doctest::Approx(std::pow(kLambda, 3)).epsilon(1e-12));
    CHECK(unstable_cocycle_norm(f, TorusPoint{0.4, 0.2}, 1) == doctest::Approx(kLambda).epsilon(1e-12));
    const auto g = cat_rotation();
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto p = uniform_point(rng, 3);
      for (int n = 1; n <= 20; ++n) {
        const double ln = std::pow(kLambda, n);
        worst = std::max(worst, std::abs(unstable_cocycle_norm(g, p, n) - ln) / ln);
      }
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("unstable cocycle norm is sub-multiplicative") {
    for (const auto& f : {cat_rotation(), perturbed_cat_rotation(0.01)}) {
      std::mt19937_64 rng(13);
      for (int trial = 0; trial < 30; ++trial) {
        const auto p = uniform_point(rng, 3);
        const int n = 1 + static_cast<int>(rng() % 6), m = 1 + static_cast<int>(rng() % 6);
        const double lhs = unstable_cocycle_norm(f, p, n + m);
        const double rhs = unstable_cocycle_norm(f, p, n) * unstable_cocycle_norm(f, apply_iterate(f, p, n), m);
        CHECK(lhs <= rhs * (1.0 + 1e-9));
      }
    }
  }

  TEST_CASE("partial hyperbolicity of cat x rotation") {
    const auto rep = verify_partial_hyperbolicity(cat_rotation(), 200);
    CHECK(rep.pass);
    CHECK(rep.stable.max == doctest::Approx(1.0 / kLambda).epsilon(1e-12));
    CHECK(rep.center.min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.center.max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.unstable.min == doctest::Approx(kLambda).epsilon(1e-12));
  }

  TEST_CASE("a pure rotation has no unstable bundle") {
    const auto rep = verify_partial_hyperbolicity(circle_rotation(), 50);
    CHECK_FALSE(rep.has_unstable);
    CHECK_FALSE(rep.pass);
    CHECK_THROWS_AS(circle_rotation().unstable_rate(), Error);
  }

  TEST_CASE("perturbed cat x rotation stays partially hyperbolic") {
    const auto f = perturbed_cat_rotation(0.01);
    CHECK(f.within_cone_threshold());
    const auto rep = verify_partial_hyperbolicity(f, 200);
    CHECK(rep.pass);
    CHECK(rep.unstable.min >= kLambda - 0.1);
    CHECK(rep.unstable.max <= kLambda + 0.1);
    CHECK(jacobian_sign_consistent(f, 200));
  }

  TEST_CASE("the cone threshold rejects large perturbations") {
    CHECK(perturbed_cat_rotation(0.01).within_cone_threshold());
    CHECK_FALSE(perturbed_cat_rotation(0.5).within_cone_threshold());
    CHECK(cat_rotation().cone_threshold() == doctest::Approx((kLambda - 1.0) / 4.0));
  }

  TEST_CASE("powers of linear systems") {
    const auto f = cat_rotation();
    const auto f2 = f.power(2);
    CHECK(f2.unstable_rate() == doctest::Approx(kLambda * kLambda).epsilon(1e-12));
    std::mt19937_64 rng(17);
    for (int i = 0; i < 20; ++i) {
      const auto p = uniform_point(rng, 3);
      CHECK(torus_distance(apply_map(f2, p), apply_iterate(f, p, 2)) < 1e-12);
    }
    CHECK(std::abs(f2.log_unstable_volume_growth() - 2.0 * f.log_unstable_volume_growth()) <= 1e-12);
  }

  TEST_CASE("unstable direction of the cat map") {
    const Vec v = unstable_direction(cat_map(), TorusPoint{0.3, 0.6});
    // (1, lambda - 2) spans the lambda-eigenspace.
    CHECK(std::abs(v[1] / v[0] - (kLambda - 2.0)) < 1e-12);
    CHECK(v.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("lift inverse inverts the lift") {
    const auto f = perturbed_cat_rotation(0.01);
    std::mt19937_64 rng(19);
    for (int i = 0; i < 20; ++i) {
      const Vec w = uniform_point(rng, 3).coords();
      CHECK((f.lift(f.lift_inverse(w)) - w).norm() < 1e-12);
    }
  }
}
