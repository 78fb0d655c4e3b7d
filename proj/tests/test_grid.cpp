#include "doctest.h"

#include <cmath>

#include "bcm/errors.hpp"
#include "bcm/grid.hpp"

using namespace bcm;

TEST_CASE("grid spec validation and coordinates") {
  GridSpec g = square_grid(5.0, 0.05);
  CHECK(g.nx == 101);
  CHECK(g.ny == 101);
  CHECK(g.x(100) == doctest::Approx(5.0));
  GridSpec bad = g;
  bad.nx = 2;
  CHECK_THROWS_AS(bad.validate(), StructuralError);
  bad = g;
  bad.dx = -1.0;
  CHECK_THROWS_AS(bad.validate(), StructuralError);
}

TEST_CASE("laplacian is exact for quadratics in the interior") {
  const GridSpec g = square_grid(1.0, 0.1);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return x * x + 2.0 * y * y; });
  const ScalarField lap = laplacian(f);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) CHECK(lap(i, j) == doctest::Approx(6.0));
}

TEST_CASE("laplacian of a constant vanishes and integrates to zero") {
  const GridSpec g = square_grid(2.0, 0.1);
  const ScalarField one(g, 3.0);
  CHECK(laplacian(one).values().abs().maxCoeff() < 1e-12);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return std::sin(3 * x) * std::cos(y); });
  CHECK(std::abs(integrate(laplacian(f))) < 1e-10);
}

TEST_CASE("div_flux conserves mass with heterogeneous D") {
  const GridSpec g = square_grid(2.0, 0.05);
  const ScalarField D = ScalarField::sample(g, [](double x, double y) { return x < 1.0 ? 0.0 : 1.0 + y; });
  const ScalarField c = ScalarField::sample(g, [](double x, double y) { return std::exp(-x) + y * y; });
  for (FaceAverage mode : {FaceAverage::Arithmetic, FaceAverage::Harmonic})
    CHECK(std::abs(integrate(div_flux(D, c, mode))) < 1e-10);
}

TEST_CASE("div_flux rejects negative diffusivity") {
  const GridSpec g = square_grid(1.0, 0.1);
  CHECK_THROWS_AS(div_flux(ScalarField(g, -1.0), ScalarField(g, 0.0)), ContractError);
}

TEST_CASE("no flux through a D = 0 block") {
  const GridSpec g = square_grid(2.0, 0.05);
  const ScalarField D = ScalarField::sample(
      g, [](double x, double y) { return (x > 0.5 && x < 1.5 && y > 0.5 && y < 1.5) ? 0.0 : 1.0; });
  const ScalarField c = ScalarField::sample(g, [](double x, double) { return x; });
  const ScalarField r = div_flux(D, c, FaceAverage::Harmonic);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (D(i, j) == 0.0) CHECK(r(i, j) == 0.0);
}

TEST_CASE("gradient uses central differences inside and one-sided at the edges") {
  const GridSpec g = square_grid(1.0, 0.1);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return 2.0 * x - 3.0 * y; });
  const VectorField gr = gradient(f);
  CHECK(gr.x.values().isApprox(NodeArray<double>::Constant(g.ny, g.nx, 2.0)));
  CHECK(gr.y.values().isApprox(NodeArray<double>::Constant(g.ny, g.nx, -3.0)));
  const VectorField p = perp_gradient(f);
  CHECK(p.x(3, 3) == doctest::Approx(3.0));
  CHECK(p.y(3, 3) == doctest::Approx(2.0));
}

TEST_CASE("trapezoid integral of a bilinear field is exact") {
  const GridSpec g = square_grid(2.0, 0.1);
  const ScalarField f = ScalarField::sample(g, [](double x, double y) { return 1.0 + x * y; });
  CHECK(integrate(f) == doctest::Approx(4.0 + 4.0));
  const GridSpec l = line_grid(3.0, 0.01);
  CHECK(integrate(ScalarField(l, 2.0)) == doctest::Approx(6.0));
}

TEST_CASE("div_vector integrates to zero") {
  const GridSpec g = square_grid(1.0, 0.05);
  VectorField q{ScalarField::sample(g, [](double x, double y) { return x * y + 1.0; }),
                ScalarField::sample(g, [](double x, double y) { return std::sin(x + y); })};
  CHECK(std::abs(integrate(div_vector(q))) < 1e-12);
}

TEST_CASE("shape mismatch is a structural error") {
  CHECK_THROWS_AS(div_flux(ScalarField(square_grid(1.0, 0.1), 1.0), ScalarField(square_grid(1.0, 0.05), 1.0)),
                  StructuralError);
}

TEST_CASE("fields are templated on the scalar type") {
  const GridSpec g = square_grid(1.0, 0.1);
  BasicField<float> f(g, 1.0f);
  CHECK(integrate(f) == doctest::Approx(1.0f));
  CHECK(laplacian(f).values().abs().maxCoeff() < 1e-5f);
}
