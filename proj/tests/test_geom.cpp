#include "doctest.h"

#include "grwflow/errors.hpp"
#include "grwflow/geom.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <memory>

using namespace grwflow;

namespace {

geom::GraphState make_state(const std::string &profile, int n, double K_M, leaf::Domain d,
                            std::size_t points, const std::function<double(double)> &u) {
  auto setup = std::make_shared<const geom::Setup>(warp::WarpProfile::catalog(profile),
                                                   leaf::LeafGeometry(n, K_M, d), points);
  geom::GraphState s{setup, 0.0, {}};
  for (std::size_t i = 0; i < points; ++i) {
    s.u.push_back(u(setup->x(i)));
  }
  return s;
}

// Ric(nu, nu) of g = diag(-1, rho^2, rho^2 chi^2, ...) from Christoffel symbols,
// all derivatives by centred differences. Coordinates (s, x, y1, ...); the
// metric depends on s and x only. chi == 1 gives the flat slab.
constexpr int D = 3; // n = 2

using Vec = std::array<double, D>;
using Gamma = std::array<std::array<std::array<double, D>, D>, D>;

struct DiagMetric {
  std::function<double(double)> rho;
  std::function<double(double)> chi;
  Vec at(double s, double x) const {
    const double r2 = rho(s) * rho(s);
    return {-1.0, r2, r2 * chi(x) * chi(x)};
  }
};

Gamma christoffel(const DiagMetric &g, double s, double x) {
  const double h = 1e-5;
  const Vec gs = g.at(s, x);
  Vec ds{}, dx{};
  const Vec sp = g.at(s + h, x), sm = g.at(s - h, x), xp = g.at(s, x + h), xm = g.at(s, x - h);
  for (int a = 0; a < D; ++a) {
    ds[a] = (sp[a] - sm[a]) / (2 * h);
    dx[a] = (xp[a] - xm[a]) / (2 * h);
  }
  auto dg = [&](int c, int a) { return c == 0 ? ds[a] : c == 1 ? dx[a] : 0.0; };
  Gamma G{};
  // diagonal metric: Gamma^a_bc = (1/2 g_aa)(d_b g_ac + d_c g_ab - d_a g_bc)
  for (int a = 0; a < D; ++a) {
    for (int b = 0; b < D; ++b) {
      for (int c = 0; c < D; ++c) {
        double v = 0.0;
        if (a == c) v += dg(b, a);
        if (a == b) v += dg(c, a);
        if (b == c) v -= dg(a, b);
        G[a][b][c] = 0.5 * v / gs[a];
      }
    }
  }
  return G;
}

double ricci_nu_oracle(const DiagMetric &g, double s, double x, double p) {
  const Gamma G = christoffel(g, s, x);
  // centred differences of Gamma, Richardson-extrapolated from steps h and h/2
  auto diff = [&](double h) {
    std::array<Gamma, 2> d{};
    const Gamma sp = christoffel(g, s + h, x), sm = christoffel(g, s - h, x);
    const Gamma xp = christoffel(g, s, x + h), xm = christoffel(g, s, x - h);
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c) {
          d[0][a][b][c] = (sp[a][b][c] - sm[a][b][c]) / (2 * h);
          d[1][a][b][c] = (xp[a][b][c] - xm[a][b][c]) / (2 * h);
        }
    return d;
  };
  const auto d1 = diff(2e-3), d2 = diff(1e-3);
  auto dG = [&](int c, int a, int b, int d) {
    if (c > 1) return 0.0;
    return (4.0 * d2[c][a][b][d] - d1[c][a][b][d]) / 3.0;
  };
  double Ric[D][D] = {};
  for (int b = 0; b < D; ++b) {
    for (int d = 0; d < D; ++d) {
      double r = 0.0;
      for (int a = 0; a < D; ++a) {
        r += dG(a, a, b, d) - dG(d, a, a, b);
        for (int e = 0; e < D; ++e) {
          r += G[a][a][e] * G[e][b][d] - G[a][d][e] * G[e][a][b];
        }
      }
      Ric[b][d] = r;
    }
  }
  // normal of s = u(x): raise d(s - u) and normalize
  const Vec gs = g.at(s, x);
  Vec nu{-1.0, -p / gs[1], 0.0};
  const double norm2 = -(gs[0] * nu[0] * nu[0] + gs[1] * nu[1] * nu[1]);
  double out = 0.0;
  for (int a = 0; a < D; ++a) {
    for (int b = 0; b < D; ++b) {
      out += Ric[a][b] * nu[a] * nu[b];
    }
  }
  return out / norm2;
}

} // namespace

TEST_CASE("tilt") {
  auto t0 = geom::tilt_from(2.0, 0.0);
  CHECK(t0.W == doctest::Approx(2.0));
  CHECK(t0.Theta == doctest::Approx(2.0));
  CHECK(t0.theta == doctest::Approx(1.0));
  CHECK(t0.alpha == doctest::Approx(0.0));

  auto t1 = geom::tilt_from(2.0, 1.0);
  CHECK(t1.W == doctest::Approx(std::sqrt(3.0)));
  CHECK(t1.Theta == doctest::Approx(4.0 / std::sqrt(3.0)));
  CHECK(t1.theta == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(std::cosh(t1.alpha) == doctest::Approx(t1.theta));

  CHECK_THROWS_AS(geom::tilt_from(2.0, 2.0), NotSpacelike);
}

TEST_CASE("mirror ghosts make boundary slopes vanish") {
  auto s = make_state("reference", 2, 0.0, leaf::Domain::ball(1.0), 21,
                      [](double r) { return 1.0 + 0.1 * r * r; });
  CHECK(geom::derivatives(s, 0).p == 0.0);
  CHECK(geom::derivatives(s, 20).p == 0.0);
  CHECK(geom::derivatives(s, 7).p == doctest::Approx(0.2 * s.setup->x(7)));
}

TEST_CASE("slices are umbilic with H = n rho'/rho") {
  for (auto [name, n] : {std::pair{"reference", 3}, std::pair{"steady_state", 2},
                         std::pair{"minkowski_product", 2}, std::pair{"de_sitter", 1}}) {
    CAPTURE(name);
    auto s = make_state(name, n, 0.0, leaf::Domain::ball(1.0), 11, [](double) { return 0.7; });
    const auto j = s.setup->profile.jet(0.7);
    const double q = j.d1 / j.rho;
    for (std::size_t i : {0u, 4u, 10u}) {
      auto k = geom::second_fundamental(s, i);
      CHECK(k.radial == doctest::Approx(q));
      if (n > 1) {
        CHECK(k.tangential == doctest::Approx(q));
      }
      CHECK(geom::mean_curvature_trace(s, i) == doctest::Approx(n * q));
      CHECK(geom::mean_curvature_divergence(s, i) == doctest::Approx(n * q));
      CHECK(geom::norm_A_squared(s, i) == doctest::Approx(n * q * q));
    }
  }
  auto ss = make_state("steady_state", 2, 0.0, leaf::Domain::interval(0, 1), 11,
                       [](double) { return -0.3; });
  CHECK(geom::mean_curvature_trace(ss, 5) == doctest::Approx(2.0));
  auto mk = make_state("minkowski_product", 2, 0.0, leaf::Domain::interval(0, 1), 11,
                       [](double) { return 4.0; });
  CHECK(geom::mean_curvature_trace(mk, 5) == 0.0);
  CHECK(geom::mean_curvature_divergence(mk, 5) == 0.0);
}

TEST_CASE("flat parabola") {
  auto s = make_state("minkowski_product", 1, 0.0, leaf::Domain::interval(-1, 1), 21,
                      [](double x) { return 0.1 * x * x; });
  auto k = geom::second_fundamental(s, 10); // x = 0
  CHECK(k.radial == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(geom::norm_A_squared(s, 10) == doctest::Approx(0.04).epsilon(1e-12));

  auto flat = make_state("minkowski_product", 1, 0.0, leaf::Domain::interval(-1, 1), 21,
                         [](double x) { return 0.3 * x; });
  CHECK(geom::second_fundamental(flat, 10).radial == doctest::Approx(0.0));
}

TEST_CASE("n = 1: |A|^2 = H^2, and the curve curvature u''/W^3 in Minkowski") {
  auto u = [](double x) { return 0.2 * std::sin(2.0 * x); };
  for (std::size_t N : {201u, 401u}) {
    auto s = make_state("minkowski_product", 1, 0.0, leaf::Domain::interval(0, 1), N, u);
    const std::size_t i = (N - 1) / 3;
    const double x = s.setup->x(i);
    const double p = 0.4 * std::cos(2.0 * x), uxx = -0.8 * std::sin(2.0 * x);
    const double exact = uxx / std::pow(1.0 - p * p, 1.5);
    const double H = geom::mean_curvature_trace(s, i);
    CHECK(H == doctest::Approx(exact).epsilon(2e-5));
    CHECK(geom::norm_A_squared(s, i) == doctest::Approx(H * H));
  }
  auto w = make_state("reference", 1, 0.0, leaf::Domain::interval(0, 1), 51,
                      [](double x) { return 1.0 + 0.1 * std::cos(3.14159 * x); });
  CHECK(geom::norm_A_squared(w, 17) ==
        doctest::Approx(std::pow(geom::mean_curvature_trace(w, 17), 2)));
}

TEST_CASE("trace and divergence forms of H converge to each other") {
  double prev = 0.0;
  for (std::size_t N : {101u, 201u}) {
    auto s = make_state("reference", 2, 0.0, leaf::Domain::ball(1.0), N, [](double r) {
      return 1.0 + 0.2 * std::cos(3.141592653589793 * r);
    });
    double sup = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      sup = std::max(sup, std::abs(geom::mean_curvature_trace(s, i) -
                                   geom::mean_curvature_divergence(s, i)));
    }
    if (prev > 0.0) {
      CHECK(prev / sup == doctest::Approx(4.0).epsilon(0.25));
    }
    prev = sup;
  }
}

TEST_CASE("ambient Ricci in closed cases") {
  // de Sitter over the unit sphere has constant curvature 1
  auto ds = make_state("de_sitter", 2, 1.0, leaf::Domain::ball(1.0), 21,
                       [](double r) { return 0.3 + 0.2 * r * r; });
  for (std::size_t i : {0u, 5u, 13u, 20u}) {
    CHECK(geom::ambient_ricci_nu(ds, i).ric_nu == doctest::Approx(-2.0));
  }
  auto mk = make_state("minkowski_product", 2, 0.0, leaf::Domain::interval(0, 1), 21,
                       [](double x) { return 0.3 * x; });
  CHECK(geom::ambient_ricci_nu(mk, 9).ric_nu == doctest::Approx(0.0));

  auto flat = make_state("reference", 3, 0.0, leaf::Domain::interval(0, 1), 21,
                         [](double) { return 0.8; });
  const auto j = flat.setup->profile.jet(0.8);
  CHECK(geom::ambient_ricci_nu(flat, 4).ric_nu == doctest::Approx(-3.0 * j.d2 / j.rho));
}

TEST_CASE("ambient Ricci against Christoffel-symbol oracle") {
  struct Case {
    const char *profile;
    double K_M;
    leaf::Domain d;
  };
  for (const Case &c : {Case{"reference", 0.0, leaf::Domain::interval(0, 1)},
                        Case{"einstein_de_sitter", 0.0, leaf::Domain::ball(1.0)},
                        Case{"reference", -1.0, leaf::Domain::ball(1.0)},
                        Case{"de_sitter", 1.0, leaf::Domain::ball(1.0)},
                        Case{"steady_state", -1.0, leaf::Domain::ball(1.0)}}) {
    CAPTURE(std::string(c.profile));
    CAPTURE(c.K_M);
    const double slope = 0.4;
    auto s = make_state(c.profile, 2, c.K_M, c.d, 41,
                        [&](double x) { return 1.2 + slope * x; });
    const auto &lf = s.setup->leaf;
    const auto &prof = s.setup->profile;
    DiagMetric g{[&](double t) { return prof.rho(t); },
                 [&](double x) { return lf.radial() ? lf.jacobi(x).chi : 1.0; }};
    for (std::size_t i : {7u, 20u, 33u}) {
      const double x = s.setup->x(i);
      const double oracle = ricci_nu_oracle(g, s.u[i], x, slope);
      CAPTURE(i);
      CHECK(geom::ambient_ricci_nu(s, i).ric_nu == doctest::Approx(oracle).epsilon(1e-5));
    }
  }
}

TEST_CASE("sample matches the pointwise functions") {
  auto s = make_state("reference", 2, 0.0, leaf::Domain::ball(1.0), 31,
                      [](double r) { return 1.0 + 0.1 * std::cos(3.0 * r); });
  const auto g = geom::sample(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(g.H[i] == doctest::Approx(geom::mean_curvature_trace(s, i)));
    CHECK(g.H_div[i] == doctest::Approx(geom::mean_curvature_divergence(s, i)));
    CHECK(g.A2[i] == doctest::Approx(geom::norm_A_squared(s, i)));
    CHECK(g.Theta[i] == doctest::Approx(geom::tilt(s, i).Theta));
  }
  auto steep = make_state("minkowski_product", 1, 0.0, leaf::Domain::interval(0, 1), 11,
                          [](double x) { return 1.5 * x; });
  CHECK_THROWS_AS(geom::sample(steep), NotSpacelike);
}
