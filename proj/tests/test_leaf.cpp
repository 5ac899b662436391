#include "doctest.h"

#include "grwflow/leaf.hpp"

#include <cmath>
#include <numbers>

using grwflow::leaf::Domain;
using grwflow::leaf::LeafGeometry;

TEST_CASE("jacobi fields") {
  auto flat = LeafGeometry(2, 0.0, Domain::ball(1.0)).jacobi(0.5);
  CHECK(flat.chi == doctest::Approx(0.5));
  CHECK(flat.d1 == doctest::Approx(1.0));

  CHECK(LeafGeometry(2, -1.0, Domain::ball(2.0)).jacobi(1.0).chi ==
        doctest::Approx(std::sinh(1.0)));

  auto sph = LeafGeometry(2, 1.0, Domain::ball(1.5)).jacobi(std::numbers::pi / 2);
  CHECK(sph.chi == doctest::Approx(1.0));
  CHECK(sph.d1 == doctest::Approx(0.0).epsilon(1e-14));

  // chi'' + K chi = 0 for a non-unit curvature
  auto j = LeafGeometry(3, -0.7, Domain::ball(1.0)).jacobi(0.8);
  CHECK(j.d2 - 0.7 * j.chi == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("radial laplacian coefficient") {
  CHECK(LeafGeometry(3, 0.0, Domain::ball(3.0)).radial_laplacian_coeff(2.0) == doctest::Approx(1.0));
  CHECK(LeafGeometry(1, 0.0, Domain::ball(3.0)).radial_laplacian_coeff(0.7) == 0.0);
  CHECK(LeafGeometry(2, -1.0, Domain::ball(3.0)).radial_laplacian_coeff(1.0) ==
        doctest::Approx(1.0 / std::tanh(1.0)));
  CHECK(LeafGeometry(2, 0.0, Domain::interval(0, 1)).radial_laplacian_coeff(0.3) == 0.0);
  CHECK_THROWS(LeafGeometry(2, 0.0, Domain::ball(1.0)).radial_laplacian_coeff(0.0));
}

TEST_CASE("cutoff") {
  const LeafGeometry flat(2, 0.0, Domain::ball(1.0));
  auto c0 = flat.cutoff(1.0, 2.0, 0.0);
  CHECK(c0.xi == doctest::Approx(8.0));
  CHECK(c0.d1 == doctest::Approx(-12.0));
  CHECK(flat.cutoff(1.0, 2.0, 1.0).xi == doctest::Approx(1.0));

  // xi'' = 6 (C - chi) chi'^2 - 3 (C - chi)^2 chi'' with chi = r
  CHECK(flat.cutoff(1.0, 2.0, 0.5).d2 == doctest::Approx(6.0 * 1.5));

  const LeafGeometry hyp(2, -1.0, Domain::ball(3.0));
  const double C = 2.0 * std::sinh(1.0);
  auto beyond = hyp.cutoff(1.0, C, 2.5); // chi(2.5) > C
  CHECK(beyond.xi == 0.0);
  CHECK(beyond.d1 == 0.0);
  CHECK(beyond.d2 == 0.0);
  CHECK_THROWS(flat.cutoff(1.0, 1.5, 0.5)); // C_R < 2 chi(R)
}

TEST_CASE("hessian comparison") {
  CHECK(LeafGeometry(2, 0.0, Domain::ball(1.0)).hessian_comparison_gap(0.25) ==
        doctest::Approx(4.0));
  CHECK(LeafGeometry(2, -1.0, Domain::ball(3.0)).hessian_comparison_gap(2.0) ==
        doctest::Approx(1.0 / std::tanh(2.0)));
  CHECK(LeafGeometry(2, 1.0, Domain::ball(1.0)).hessian_comparison_gap(std::numbers::pi / 4) ==
        doctest::Approx(1.0));
}

TEST_CASE("leaf measure and domain validation") {
  const LeafGeometry ball(3, 0.0, Domain::ball(1.0));
  CHECK(ball.measure(0.5) == doctest::Approx(0.25));
  CHECK(LeafGeometry(3, 0.0, Domain::interval(0, 1)).measure(0.5) == 1.0);
  CHECK_THROWS(LeafGeometry(0, 0.0, Domain::interval(0, 1)));
  CHECK_THROWS(LeafGeometry(2, 0.0, Domain::interval(1, 0)));
  // a ball on the unit sphere must stay inside the conjugate radius pi
  CHECK_THROWS(LeafGeometry(2, 1.0, Domain::ball(3.5)));
}
