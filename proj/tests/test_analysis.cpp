#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "bcm/analysis.hpp"
#include "bcm/errors.hpp"
#include "bcm/scenario.hpp"

using namespace bcm;

TEST_CASE("centroid of a disc") {
  const GridSpec g = square_grid(2.0, 0.02);
  const ScalarField phi = ScalarField::sample(g, [](double x, double y) {
    return 0.5 * (1.0 + std::tanh((0.3 - std::hypot(x - 0.7, y - 1.1)) / 0.03));
  });
  const auto [cx, cy] = centroid(phi);
  CHECK(cx == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(cy == doctest::Approx(1.1).epsilon(1e-6));
  CHECK_THROWS_AS(centroid(ScalarField(g, 0.0)), ContractError);
}

TEST_CASE("speed series of uniform motion") {
  Trajectory tr;
  for (int n = 0; n < 20; ++n) tr.push_back({0.5 * n, 1.0 + 0.3 * n, 2.0 - 0.4 * n, 0.0, 0.15, 0.0});
  const Trajectory s = speed_series(tr, 5);
  REQUIRE(s.size() == tr.size());
  for (const auto& r : s) CHECK(r.speed == doctest::Approx(1.0));
  CHECK(s[3].cluster_volume == 0.15);
  CHECK_THROWS_AS(speed_series({}), ContractError);
}

TEST_CASE("cross section interpolates between rows") {
  const GridSpec g = square_grid(1.0, 0.1);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return x + 2.0 * y; });
  const Section s = cross_section(f, 0.25);
  REQUIRE(s.x.size() == static_cast<std::size_t>(g.nx));
  CHECK(s.value[3] == doctest::Approx(0.3 + 0.5));
  CHECK_THROWS_AS(cross_section(f, 1.5), std::out_of_range);
}

TEST_CASE("mass balance residual") {
  const GridSpec g = square_grid(1.0, 0.1);
  ChemoParams cp;
  ChemoState st{ScalarField(g, 2.0), ScalarField(g, 1.0), ScalarField(g, 2.0 * cp.k), 0.0, std::nullopt};
  CHECK(mass_balance_residual(st, cp) == doctest::Approx(0.0));
  st.c.values() *= 1.1;
  CHECK(mass_balance_residual(st, cp) == doctest::Approx(0.1));
  st.source = ScalarField(g, 0.0);
  CHECK_THROWS_AS(mass_balance_residual(st, cp), ContractError);
}

TEST_CASE("confinement metric") {
  const GridSpec g = square_grid(5.0, 0.05);
  SceneConfig sc = SceneConfig::defaults();
  sc.gap = 0.3;
  const PhaseSet ps = build_chamber(sc, g);
  ScalarField c(g, 1.0);
  CHECK(confinement_metric(c, ps) == doctest::Approx(1.0));
  // Raising c inside cells only raises the metric.
  ScalarField inside = occupancy(ps);
  c.values() += 3.0 * (inside.values() > 0.9).cast<double>();
  CHECK(confinement_metric(c, ps) > 3.0);
  CHECK_THROWS_AS(confinement_metric(ScalarField(g, 0.0), ps), ContractError);
}

TEST_CASE("corridor profile walks away from the oocyte") {
  const GridSpec g = square_grid(5.0, 0.05);
  SceneConfig sc = SceneConfig::defaults();
  sc.seed_cluster = false;
  sc.gap = 0.3;
  const PhaseSet ps = build_chamber(sc, g);
  const ScalarField c = ScalarField::sample(g, [](double x, double) { return std::exp(x); });
  const CorridorProfile p = corridor_profile(c, ps, 2.5);
  REQUIRE(p.value.size() > 5);
  for (std::size_t i = 1; i < p.value.size(); ++i) {
    CHECK(p.distance[i] > p.distance[i - 1]);
    CHECK(p.value[i] < p.value[i - 1]);
  }
  CHECK(p.max_ripple == 0.0);
}
