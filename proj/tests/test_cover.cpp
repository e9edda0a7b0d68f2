#include "upress/cover.hpp"
#include "upress/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace upress;

namespace {

const double kLogLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);

TrigPolynomial cos_x1() { return TrigPolynomial{0.0, {TrigTerm{0, {1, 0, 0}, 0.0, 1.0}}}; }

}  // namespace

TEST_SUITE("cover") {
  TEST_CASE("uniform covers tile the leaf") {
    const auto c = uniform_cover(0.1, 0.04);
    REQUIRE(!c.empty());
    CHECK(c.front().lo == doctest::Approx(-0.12));
    for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k].lo < c[k - 1].hi);
    CHECK(c.back().hi >= 0.1);
    LeafCover tiles(c, 0.1);
    CHECK(tiles.period() == doctest::Approx(0.2));
    CHECK(tiles.contains(0.0, 0.019));
    CHECK_FALSE(tiles.contains(0.0, 0.05));
    // Periodicity: containment is invariant under translation by 2 delta.
    CHECK(tiles.contains(0.4, 0.419));
  }

  TEST_CASE("covers with gaps are rejected") {
    CHECK_THROWS_AS(LeafCover({{-0.1, 0.0}, {0.01, 0.1}}, 0.1), Error);
    CHECK_THROWS_AS(LeafCover({}, 0.1), Error);
    CHECK_THROWS_AS(LeafCover({{0.0, 0.0}}, 0.1), Error);
    CHECK_THROWS_AS(LeafCover({{-0.2, 0.2}}, 0.0), Error);
  }

  TEST_CASE("a single interval gives the sup of the weights at n = 1") {
    const auto sys = cat_rotation();
    const auto chart = build_leaf_chart(sys, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    BowenDistanceEvaluator ev(sys, chart, 1);
    const LeafCover whole({{-0.15, 0.15}}, 0.1);
    const auto params = linspace(-0.1, 0.1, 41);
    std::vector<double> w(params.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(17.0 * params[i]);
    CHECK(cover_log_pressure(ev, whole, params, 1, w) == doctest::Approx(*std::max_element(w.begin(), w.end())));
  }

  TEST_CASE("block DP matches the assignment oracle") {
    const auto sys = cat_rotation();
    const auto chart = build_leaf_chart(sys, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    BowenDistanceEvaluator ev(sys, chart, 3);
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const double length = 0.03 + 0.1 * u(rng);
      const LeafCover cover(uniform_cover(0.1, length), 0.1);
      const std::size_t m = 2 + rng() % 9;
      std::vector<double> params(m);
      for (auto& p : params) p = -0.1 + 0.2 * u(rng);
      std::sort(params.begin(), params.end());
      std::vector<double> w(m);
      for (auto& v : w) v = -2.0 + 4.0 * u(rng);
      const int n = 1 + static_cast<int>(rng() % 3);
      const auto join = build_join(ev, cover, params, n);
      double assignments = 1.0;
      for (const auto& mem : join.members) assignments *= static_cast<double>(mem.size());
      if (assignments > static_cast<double>(1 << 22)) continue;
      CHECK(std::abs(cover_log_pressure(ev, cover, params, n, w) - cover_log_pressure_oracle(join, w)) <= 1e-9);
      ++compared;
    }
    CHECK(compared >= 40);
  }

  TEST_CASE("joins beyond the element limit are refused") {
    const auto sys = cat_rotation();
    const auto chart = build_leaf_chart(sys, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    BowenDistanceEvaluator ev(sys, chart, 4);
    const LeafCover cover(uniform_cover(0.1, 0.02), 0.1);
    try {
      build_join(ev, cover, linspace(-0.1, 0.1, 2001), 4, 50);
      FAIL("expected a refusal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
  }

  TEST_CASE("the assignment oracle refuses large inputs") {
    JoinStructure join;
    join.members.assign(13, {0});
    join.elements = 1;
    CHECK_THROWS_AS(cover_log_pressure_oracle(join, std::vector<double>(13, 0.0)), Error);
  }

  TEST_CASE("cover pressures are sub-additive and bound the packing estimate") {
    const auto sys = cat_rotation();
    const auto chart = build_leaf_chart(sys, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    for (const auto& g : {PotentialSeq::constant(0.0), PotentialSeq::cocycle_norm(1.0),
                          PotentialSeq::birkhoff(cos_x1())}) {
      CAPTURE(g.describe());
      const auto rep = cover_pressure_small(sys, chart, g, uniform_cover(0.1, 0.04), 5);
      CHECK(rep.subadditive);
      CHECK(rep.max_defect <= 1e-9);
      PressureParams p;
      const auto est = estimate_pressure(pressure_table(sys, g, TorusPoint{0.3, 0.2, 0.1}, p));
      REQUIRE(est.value.has_value());
      CHECK(rep.fekete_bound >= *est.value - kEpsilonNoise);
    }
  }

  TEST_CASE("entropy cover growth tracks the unstable rate") {
    const auto sys = cat_rotation();
    const auto chart = build_leaf_chart(sys, TorusPoint{0.3, 0.2, 0.1}, 0.1);
    const auto rep = cover_pressure_small(sys, chart, PotentialSeq::constant(0.0), uniform_cover(0.1, 0.02), 5);
    // Elements multiply by about lambda per step once the pushed leaf exceeds the cover scale.
    const double growth = (rep.log_p[4] - rep.log_p[2]) / 2.0;
    CHECK(std::abs(growth - kLogLambda) <= 0.1);
    for (std::size_t k = 1; k < rep.join_sizes.size(); ++k) CHECK(rep.join_sizes[k] >= rep.join_sizes[k - 1]);
  }
}
