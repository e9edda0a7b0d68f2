#include "upress/error.hpp"
#include "upress/potentials.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace upress;

namespace {

const double kLogLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);

TrigPolynomial cos_x1() { return TrigPolynomial{0.0, {TrigTerm{0, {1, 0, 0}, 0.0, 1.0}}}; }

// Birkhoff sum of cos(2 pi x_1) along cat x rotation, iterated by hand.
double birkhoff_oracle(TorusPoint p, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += std::cos(2.0 * std::numbers::pi * p[0]);
    p = TorusPoint{2 * p[0] + p[1], p[0] + p[1], p[2] + kGoldenRotation};
  }
  return sum;
}

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("closed-form values") {
    const auto f = cat_map();
    const TorusPoint x{0.3, 0.6};
    CHECK(PotentialSeq::cocycle_norm(1.0).eval(f, x, 4) == doctest::Approx(4.0 * kLogLambda).epsilon(1e-12));
    CHECK(PotentialSeq::cocycle_norm(1.0).eval(f, x, 4) == doctest::Approx(3.849695).epsilon(1e-6));
    CHECK(PotentialSeq::cocycle_norm(1.0).eval(f, x, 0) == 0.0);
    CHECK(PotentialSeq::birkhoff(TrigPolynomial{0.5, {}}).eval(f, x, 6) == doctest::Approx(3.0));
    CHECK(PotentialSeq::constant(0.25).eval(f, x, 8) == doctest::Approx(2.0));
  }

  TEST_CASE("Birkhoff sums match the hand-iterated oracle") {
    const auto f = cat_rotation();
    const auto g = PotentialSeq::birkhoff(cos_x1());
    std::mt19937_64 rng(41);
    for (int i = 0; i < 30; ++i) {
      const auto p = uniform_point(rng, 3);
      for (int n : {1, 3, 7}) CHECK(std::abs(g.eval(f, p, n) - birkhoff_oracle(p, n)) < 1e-9);
    }
  }

  TEST_CASE("combinators are exact at finite n") {
    const auto f = perturbed_cat_rotation(0.01);
    const auto g = PotentialSeq::cocycle_norm(0.7);
    const auto h = PotentialSeq::birkhoff(cos_x1());
    std::mt19937_64 rng(43);
    for (int i = 0; i < 20; ++i) {
      const auto p = uniform_point(rng, 3);
      const int n = 1 + static_cast<int>(rng() % 6);
      const double gv = g.eval(f, p, n), hv = h.eval(f, p, n);
      CHECK(PotentialSeq::shift(0.3, g).eval(f, p, n) == gv + n * 0.3);
      CHECK(PotentialSeq::scale(2.5, g).eval(f, p, n) == 2.5 * gv);
      CHECK(PotentialSeq::sum(g, h).eval(f, p, n) == gv + hv);
      CHECK(PotentialSeq::max(g, h).eval(f, p, n) == std::max(gv, hv));
      // Telescoping: h_n(f x) - h_n(x) = phi(f^n x) - phi(x).
      const auto fp = apply_map(f, p);
      const double phi_n = std::cos(2.0 * std::numbers::pi * apply_iterate(f, p, n)[0]);
      const double phi_0 = std::cos(2.0 * std::numbers::pi * p[0]);
      CHECK(std::abs(PotentialSeq::coboundary_twist(g, h).eval(f, p, n) - (gv + phi_n - phi_0)) < 1e-12);
      CHECK(std::abs(h.eval(f, fp, n) - hv - (phi_n - phi_0)) < 1e-12);
    }
    CHECK_THROWS_AS(PotentialSeq::scale(-1.0, g), Error);
    CHECK_THROWS_AS(PotentialSeq::coboundary_twist(g, PotentialSeq::max(h, g)), Error);
  }

  TEST_CASE("stage and iterate potentials") {
    const auto f = cat_rotation();
    const auto h = PotentialSeq::birkhoff(cos_x1());
    const auto s3 = PotentialSeq::stage(h, 3);
    const TorusPoint p{0.1, 0.2, 0.3};
    double expected = 0.0;
    for (int i = 0; i < 4; ++i) expected += h.eval(f, apply_iterate(f, p, i), 3) / 3.0;
    CHECK(std::abs(s3.eval(f, p, 4) - expected) < 1e-12);
    const auto it = PotentialSeq::iterate(h, 2, f);
    CHECK(std::abs(it.eval(f.power(2), p, 3) - h.eval(f, p, 6)) < 1e-12);
  }

  TEST_CASE("sub-additivity audit") {
    const auto f = perturbed_cat_rotation(0.01);
    const auto additive = check_subadditivity(PotentialSeq::birkhoff(cos_x1()), f, 100, 12);
    CHECK(additive.pass);
    REQUIRE(additive.max_equality_defect.has_value());
    CHECK(*additive.max_equality_defect <= 1e-9);

    const auto lin = check_subadditivity(PotentialSeq::cocycle_norm(1.0), cat_rotation(), 100, 12);
    CHECK(lin.pass);
    CHECK(lin.max_violation <= 1e-12);

    const auto broken = PotentialSeq::custom("n^2", [](const TorusSystem&, const TorusPoint&, int n) {
      return static_cast<double>(n) * n;
    });
    CHECK_FALSE(check_subadditivity(broken, f, 20, 10).pass);

    const auto g = PotentialSeq::cocycle_norm(1.0), h = PotentialSeq::birkhoff(cos_x1());
    for (const auto& q : {g, h, PotentialSeq::constant(-0.4), PotentialSeq::sum(g, h), PotentialSeq::scale(0.5, g),
                          PotentialSeq::shift(1.0, h), PotentialSeq::coboundary_twist(g, h), PotentialSeq::max(g, h),
                          PotentialSeq::stage(PotentialSeq::max(g, h), 2)}) {
      CAPTURE(q.describe());
      CHECK(check_subadditivity(q, f, 60, 10).pass);
    }
  }

  TEST_CASE("Lyapunov functional on known measures") {
    const auto f = cat_rotation();
    const auto haar = haar_measure(f, 2000, 3);
    const auto cocycle = lyapunov_functional(PotentialSeq::cocycle_norm(1.0), f, haar, {2, 4, 8, 16});
    CHECK(std::abs(cocycle.value - kLogLambda) <= 3.0 * cocycle.stderr_ + 1e-12);

    const auto f0 = cat_rotation(0.0);
    const auto fixed = periodic_orbit(f0, {TorusPoint{0.0, 0.0, 0.0}});
    TrigPolynomial phi{0.2, {TrigTerm{0, {1, 1, 0}, 0.3, 0.7}}};
    const auto b = lyapunov_functional(PotentialSeq::birkhoff(phi), f0, fixed, {1, 5});
    CHECK(b.value == doctest::Approx(phi.value(Vec::Zero(3))).epsilon(1e-14));

    for (const auto& mu : {haar, fixed})
      CHECK(lyapunov_functional(PotentialSeq::constant(-0.75), f0, mu, {3, 6}).value ==
            doctest::Approx(-0.75).epsilon(1e-14));
  }

  TEST_CASE("integrated stage values do not increase on linear systems") {
    const auto f = cat_rotation();
    const auto haar = haar_measure(f, 2000, 5);
    for (const auto& g : {PotentialSeq::cocycle_norm(0.5),
                          PotentialSeq::sum(PotentialSeq::cocycle_norm(1.0), PotentialSeq::birkhoff(cos_x1()))}) {
      const auto est = lyapunov_functional(g, f, haar, {2, 4, 8, 16});
      for (std::size_t i = 1; i < est.stages.size(); ++i)
        CHECK(est.stages[i].second <= est.stages[i - 1].second + 3.0 * est.stderr_ + 1e-12);
    }
  }

  TEST_CASE("center circles stand in for fixed points under irrational rotation") {
    const auto f = cat_rotation();
    CHECK_THROWS_AS(periodic_orbit(f, {TorusPoint{0.0, 0.0, 0.0}}), Error);
    const auto circle = center_circle(f, {TorusPoint{0.0, 0.0, 0.0}}, 2);
    CHECK(circle.certified());
    CHECK(circle.hu == 0.0);
    // cos(2 pi x_1) vanishes nowhere on the circle x_1 = 0: its average is exactly 1.
    const auto est = lyapunov_functional(PotentialSeq::birkhoff(cos_x1()), f, circle, {4});
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(analytic_lyapunov(PotentialSeq::cocycle_norm(1.0), f, circle).value() ==
          doctest::Approx(kLogLambda).epsilon(1e-12));
  }

  TEST_CASE("minus infinity is a sentinel") {
    const auto f = cat_rotation();
    const auto g = PotentialSeq::custom("-inf", [](const TorusSystem&, const TorusPoint&, int n) { return -1e9 * n; });
    const auto est = lyapunov_functional(g, f, haar_measure(f, 10), {2});
    CHECK(est.minus_infinity);
    CHECK(std::isfinite(est.value));
  }

  TEST_CASE("empirical orbits are never certified") {
    const auto mu = empirical_orbit(TorusPoint{0.1, 0.2, 0.3}, 50);
    CHECK_FALSE(mu.certified());
    CHECK_FALSE(haar_measure(perturbed_cat_rotation(0.01)).certified());
  }
}
