#include "upress/error.hpp"
#include "upress/leaf.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

using namespace upress;

namespace {

const double kLambda = (3.0 + std::sqrt(5.0)) / 2.0;

// Leaf parameter of the chart at f(x) whose arclength coordinate is `target` (bisection).
double param_at_arclength(const LeafChart& chart, double target) {
  double lo = -chart.radius(), hi = chart.radius();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chart.arclength(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("leaf") {
  TEST_CASE("linear chart of the cat map") {
    const auto f = cat_map();
    const auto chart = build_leaf_chart(f, TorusPoint{0.0, 0.0}, 0.1);
    CHECK(chart.kind() == ChartKind::ExactLinear);
    const Vec v = chart.frame();
    CHECK(std::abs(v[1] / v[0] - 1.0 / (kLambda - 1.0)) < 1e-12);
    CHECK(torus_distance(chart.point(0.05), chart.center()) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(du_distance(chart, 0.0, 0.05) == doctest::Approx(0.05).epsilon(1e-12));
  }

  TEST_CASE("degenerate radii are rejected") {
    CHECK_THROWS_AS(build_leaf_chart(cat_map(), TorusPoint{0.0, 0.0}, 0.0), Error);
    try {
      build_leaf_chart(cat_map(), TorusPoint{0.0, 0.0}, 0.0);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Radius);
    }
    CHECK_THROWS_AS(build_leaf_chart(cat_map(), TorusPoint{0.0, 0.0}, 0.3), Error);
  }

  TEST_CASE("leaf distances on linear charts") {
    const auto chart = build_leaf_chart(cat_rotation(), TorusPoint{0.3, 0.2, 0.1}, 0.1);
    CHECK(du_distance(chart, -0.02, 0.03) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(du_distance(chart, 0.04, 0.04) == 0.0);
  }

  TEST_CASE("zero magnitude graph charts reproduce the linear chart") {
    const TorusPoint x{0.3, 0.2, 0.1};
    const auto linear = build_leaf_chart(cat_rotation(), x, 0.1);
    const auto zero = perturbed_cat_rotation(0.0);
    const Vec axis = zero.splitting().unstable.col(0);
    Mat transverse(3, 2);
    transverse << zero.splitting().center, zero.splitting().stable;
    const auto flat = make_graph_chart(x, 0.1, axis, transverse, chebyshev_nodes(kGraphNodes, 0.1),
                                       Mat::Zero(static_cast<Eigen::Index>(kGraphNodes), 2));
    const auto refined = graph_transform_refine(zero, flat, 10);
    CHECK(refined.residual() == 0.0);
    for (int i = 0; i < 20; ++i) {
      const double s = -0.1 + 0.2 * i / 19.0;
      CHECK((refined.lift_point(s) - linear.lift_point(s)).norm() < 1e-10);
      CHECK(std::abs(du_distance(refined, 0.0, s) - std::abs(s)) < 1e-10);
    }
  }

  TEST_CASE("graph transform converges geometrically at magnitude 0.01") {
    const auto f = perturbed_cat_rotation(0.01);
    const auto chart = build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.1, 30);
    CHECK(chart.kind() == ChartKind::GraphTransform);
    CHECK(chart.residual() <= 1e-8);
    // Successive ratios oscillate; the measured geometric rate sits near 1 / lambda.
    const auto rate = residual_decay_rate(chart.residual_history());
    REQUIRE(rate.has_value());
    CHECK(*rate <= 0.5);
    CHECK(*rate >= 0.1);
    CHECK(residual_decay_rate({1e-3, 1e-4, 1e-5, 1e-14}).value() == doctest::Approx(0.1));
    CHECK_FALSE(residual_decay_rate({0.0}).has_value());
  }

  TEST_CASE("graph transform refuses maps beyond the cone threshold") {
    const auto f = perturbed_cat_rotation(0.5);
    try {
      build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.1, 30);
      FAIL("expected a refusal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoConvergence);
    }
  }

  TEST_CASE("Bowen distance on the cat map") {
    const auto f = cat_map();
    const auto chart = build_leaf_chart(f, TorusPoint{0.0, 0.0}, 0.1);
    BowenDistanceEvaluator ev3(f, chart, 3), ev1(f, chart, 1);
    CHECK(ev3.distance(0.0, 0.01) == doctest::Approx(kLambda * kLambda * 0.01).epsilon(1e-12));
    CHECK(ev3.distance(0.0, 0.01) == doctest::Approx(0.068541).epsilon(1e-5));
    CHECK(ev1.distance(0.02, 0.03) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(ev3.distance(0.04, 0.04) == 0.0);
  }

  TEST_CASE("linear exactness of the Bowen metric") {
    const auto f = cat_rotation();
    const auto chart = build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (int n = 1; n <= 10; ++n) {
      BowenDistanceEvaluator ev(f, chart, n);
      for (int i = 0; i < 20; ++i) {
        const double s = u(rng), t = u(rng);
        const double expected = std::pow(kLambda, n - 1) * std::abs(s - t);
        CHECK(std::abs(ev.distance(s, t) - expected) <= 1e-12 * expected + 1e-300);
      }
    }
  }

  TEST_CASE("Bowen monotonicity in the depth") {
    const auto f = perturbed_cat_rotation(0.01);
    // A short chart keeps the depth-13 push-forward inside the lift budget.
    const auto chart = build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.002);
    std::vector<BowenDistanceEvaluator> ev;
    for (int n = 1; n <= 13; ++n) ev.emplace_back(f, chart, n);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-0.002, 0.002);
    for (int i = 0; i < 50; ++i) {
      const double s = u(rng), t = u(rng);
      for (std::size_t n = 1; n < ev.size(); ++n) CHECK(ev[n].distance(s, t) >= ev[n - 1].distance(s, t));
    }
  }

  TEST_CASE("re-charting at f(x) commutes with the Bowen metric") {
    for (double magnitude : {0.0, 0.01}) {
      CAPTURE(magnitude);
      const auto f = magnitude == 0.0 ? cat_rotation() : perturbed_cat_rotation(magnitude);
      const TorusPoint x{0.3, 0.2, 0.1};
      const double delta = 0.02;
      const auto chart = build_leaf_chart(f, x, delta);
      const auto next = build_leaf_chart(f, apply_map(f, x), 0.1);
      const int n = 4;
      BowenDistanceEvaluator ev(f, chart, n), ev_next(f, next, n - 1);
      const double tol = magnitude == 0.0 ? 1e-12 : 1e-8;
      std::mt19937_64 rng(31);
      std::uniform_real_distribution<double> u(-delta, delta);
      for (int i = 0; i < 20; ++i) {
        const double s = u(rng), t = u(rng);
        const double ss = param_at_arclength(next, ev.coordinate(1, s));
        const double tt = param_at_arclength(next, ev.coordinate(1, t));
        const double direct = ev.distance(s, t);
        const double via = std::max(du_distance(chart, s, t), ev_next.distance(ss, tt));
        CHECK(std::abs(direct - via) <= tol * direct);
      }
    }
  }

  TEST_CASE("comparability of leaf and ambient distances") {
    const auto lin = build_leaf_chart(cat_rotation(), TorusPoint{0.3, 0.2, 0.1}, 0.1);
    const auto rl = estimate_comparability_constant(cat_rotation(), lin, 10000);
    CHECK(rl.lower_bound_holds);
    CHECK(rl.constant <= 1.0 + 1e-9);

    const auto f = perturbed_cat_rotation(0.01);
    const auto graph = build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    const auto r1 = estimate_comparability_constant(f, graph, 10000);
    CHECK(r1.lower_bound_holds);
    CHECK(r1.constant >= 1.0);
    CHECK(r1.constant <= 1.1);
    const auto r2 = estimate_comparability_constant(f, graph, 20000, 8);
    CHECK(std::abs(r2.constant - r1.constant) <= 0.05 * r1.constant);
  }

  TEST_CASE("leaf samples") {
    const auto chart = build_leaf_chart(cat_rotation(), TorusPoint{0.3, 0.2, 0.1}, 0.1);
    const auto s5 = sample_leaf(chart, 5);
    const std::vector<double> expected{-0.1, -0.05, 0.0, 0.05, 0.1};
    for (std::size_t i = 0; i < 5; ++i) CHECK(s5.params[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    const auto s2 = sample_leaf(chart, 2);
    CHECK(s2.params.size() == 2);
    CHECK(s2.params.front() == -0.1);
    CHECK(s2.params.back() == 0.1);
    CHECK(sample_leaf(chart, 101).resolution == doctest::Approx(0.002).epsilon(1e-12));
    CHECK_THROWS_AS(sample_leaf(chart, 1), Error);
  }

  TEST_CASE("concurrent Bowen queries agree with serial ones") {
    const auto f = perturbed_cat_rotation(0.01);
    const auto chart = build_leaf_chart(f, TorusPoint{0.3, 0.2, 0.1}, 0.05);
    const BowenDistanceEvaluator ev(f, chart, 5);
    std::vector<double> serial(400), threaded(400);
    for (std::size_t i = 0; i < serial.size(); ++i) serial[i] = ev.distance(-0.05 + 1e-4 * i, 0.01);
    std::vector<std::thread> pool;
    for (int w = 0; w < 4; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < threaded.size(); i += 4)
          threaded[i] = ev.distance(-0.05 + 1e-4 * i, 0.01);
      });
    for (auto& t : pool) t.join();
    CHECK(serial == threaded);
  }
}
