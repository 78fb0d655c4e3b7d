#include "doctest.h"

#include <cmath>

#include "bcm/errors.hpp"
#include "bcm/scenario.hpp"

using namespace bcm;

TEST_CASE("default chamber seeds") {
  const SceneConfig sc = SceneConfig::defaults();
  const PhaseSet ps = build_chamber(sc, square_grid(5.0, 0.05));
  REQUIRE(ps.size() == 8);
  CHECK(ps.indices_of(CellType::Nurse).size() == 6);
  CHECK(ps.index_of(CellType::Cluster) == 6);
  CHECK(ps.index_of(CellType::Oocyte) == 7);
  CHECK(ps[6].target_volume == doctest::Approx(0.15));
  CHECK(volume(ps[6].phi) == doctest::Approx(0.15).epsilon(0.05));
  for (std::size_t a = 0; a < ps.size(); ++a)
    for (std::size_t b = a + 1; b < ps.size(); ++b)
      CHECK(overlap(ps[a].phi, ps[b].phi) <= sc.overlap_tolerance * std::min(volume(ps[a].phi), volume(ps[b].phi)));
  // Cell phases stay inside the chamber.
  CHECK(occupancy(ps).max() < 1.05);
  CHECK(ps.epithelium(0, 0) > 0.99);
  CHECK(ps.epithelium(50, 50) < 1e-6);
}

TEST_CASE("scene validation") {
  SceneConfig sc = SceneConfig::defaults();
  sc.cluster = {0.05, 2.5, 0.2};
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = SceneConfig::defaults();
  sc.nurses.push_back(sc.nurses.front());
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = SceneConfig::defaults();
  sc.gap = 0.0;
  sc.overlap_tolerance = 1e-4;
  CHECK_THROWS_AS(build_chamber(sc, square_grid(5.0, 0.05)), ConfigError);
  CHECK_THROWS_AS(build_chamber(SceneConfig::defaults(), line_grid(5.0, 0.05)), StructuralError);
}

TEST_CASE("chamber distance is exact on the axes") {
  const SceneConfig sc = SceneConfig::defaults();
  CHECK(sc.chamber_distance(sc.center_x, sc.center_y) == doctest::Approx(sc.semi_b));
  CHECK(sc.chamber_distance(sc.center_x + sc.semi_a - 0.3, sc.center_y) == doctest::Approx(0.3));
  CHECK(sc.chamber_distance(sc.center_x, sc.center_y + sc.semi_b + 0.2) == doctest::Approx(-0.2));
}

TEST_CASE("tanh window") {
  Window1D w;
  CHECK(w.width() == doctest::Approx(std::sqrt(2.0) * 0.07));
  CHECK(tanh_window(w, 0.0, w.x0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tanh_window(w, 0.0, w.x0 - w.R) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(tanh_window(w, 2.0, w.x0 + 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tanh_window(w, 0.0, 0.0) < 1e-12);
}

TEST_CASE("Allen-Cahn residual converges at second order") {
  Window1D w;
  const double r1 = ac_residual(ac_wall(w, 5.0, line_grid(10.0, 0.02)), w);
  const double r2 = ac_residual(ac_wall(w, 5.0, line_grid(10.0, 0.01)), w);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK_THROWS_AS(ac_residual(ScalarField(square_grid(1.0, 0.1), 0.0), w), StructuralError);
}

TEST_CASE("1D scene") {
  const GridSpec g = line_grid(10.0, 0.01);
  ChemoParams cp;
  const auto [ps, st] = build_1d_scene(Window1D{}, g, cp, 1.0);
  CHECK(ps.size() == 1);
  CHECK(ps[0].type == CellType::Cluster);
  CHECK(ps[0].target_volume == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(st.fixed_right.value() == 1.0);
  CHECK(st.D(500, 0) < 1e-3);
  CHECK(st.D(0, 0) > 0.99);
}
