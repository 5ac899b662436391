#include "grwflow/geom.hpp"

#include "grwflow/errors.hpp"

#include <cmath>

namespace grwflow::geom {

Setup::Setup(warp::WarpProfile p, leaf::LeafGeometry l, std::size_t n_points)
    : profile(std::move(p)), leaf(std::move(l)), points(n_points) {
  if (points < 5) {
    throw DomainError("grid needs at least 5 points");
  }
  const double hh = h();
  measure_node.resize(points);
  trans_node.resize(points);
  measure_face.resize(points + 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double xi = x(i);
    measure_node[i] = leaf.measure(xi);
    trans_node[i] = (radial() && i == 0) ? 0.0 : leaf.transversal_coeff(xi);
  }
  for (std::size_t k = 0; k <= points; ++k) {
    const double xf = leaf.domain().a + (static_cast<double>(k) - 0.5) * hh;
    // The ghost face left of a ball's origin is never weighted.
    measure_face[k] = (radial() && k == 0) ? 0.0 : leaf.measure(xf);
  }
}

namespace {

// Value at node i with mirror ghosts u_{-1} = u_1, u_N = u_{N-2}.
inline double at(std::span<const double> u, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  if (i < 0) {
    return u[static_cast<std::size_t>(-i)];
  }
  if (i >= n) {
    return u[static_cast<std::size_t>(2 * (n - 1) - i)];
  }
  return u[static_cast<std::size_t>(i)];
}

inline double trans_term(const Setup &st, std::size_t i, const Derivs &d) {
  if (st.radial() && i == 0) {
    return d.uxx; // lim (chi'/chi) u_r = u_rr at r = 0
  }
  return st.trans_node[i] * d.p;
}

// Du/(rho W) on face k (x_{k-1/2}).
double face_flux(const Setup &st, std::span<const double> u, std::size_t k, std::size_t node) {
  const double h = st.h();
  const auto kk = static_cast<std::ptrdiff_t>(k);
  const double ul = at(u, kk - 1), ur = at(u, kk);
  const double pf = (ur - ul) / h;
  const double rho = st.profile.rho(0.5 * (ul + ur));
  const double w2 = rho * rho - pf * pf;
  if (!(w2 > 0.0)) {
    throw NotSpacelike(node, st.x(node), std::abs(pf), rho);
  }
  return pf / (rho * std::sqrt(w2));
}

} // namespace

Derivs derivatives(std::span<const double> u, std::size_t i, double h) {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const double l = at(u, ii - 1), c = u[i], r = at(u, ii + 1);
  return {(r - l) / (2.0 * h), (r - 2.0 * c + l) / (h * h)};
}

Tilt tilt_from(double rho, double grad, std::size_t node, double x) {
  const double w2 = rho * rho - grad * grad;
  if (!(w2 > 0.0)) {
    throw NotSpacelike(node, x, std::abs(grad), rho);
  }
  const double W = std::sqrt(w2);
  const double theta = rho / W;
  return {W, rho * rho / W, theta, std::acosh(theta)};
}

Tilt tilt(const GraphState &s, std::size_t node) {
  const Derivs d = derivatives(s, node);
  return tilt_from(s.setup->profile.rho(s.u[node]), d.p, node, s.setup->x(node));
}

PointGeometry point_geometry(const warp::Jet &j, double p, double uxx, double trans_p, int n,
                             double K_M, std::size_t node, double x) {
  PointGeometry g{};
  g.tilt = tilt_from(j.rho, p, node, x);
  const double W = g.tilt.W;
  const double p2 = p * p;
  // a_ij = (rho^2 u_{i;j} - 2 rho rho' u_i u_j + rho^3 rho' sigma_ij)/(rho W),
  // divided by g_rr = W^2 and g_tt = rho^2 respectively.
  g.k.radial = (j.rho * uxx - 2.0 * j.d1 * p2 + j.rho * j.rho * j.d1) / (W * W * W);
  g.k.tangential = (trans_p + j.rho * j.d1) / (j.rho * W);
  const double m = n - 1;
  g.H = g.k.radial + m * g.k.tangential;
  g.A2 = g.k.radial * g.k.radial + m * g.k.tangential * g.k.tangential;
  g.grad_s2 = p2 / (W * W); // = sinh^2(alpha)
  const double ddr = j.d2 / j.rho;
  g.ric_nu = -n * ddr + m * (K_M / (j.rho * j.rho) - j.log_derivative_slope()) * g.grad_s2;
  g.ncc_gap = g.ric_nu + n * ddr;
  return g;
}

namespace {

PointGeometry point_at(const GraphState &s, std::size_t node) {
  const Setup &st = *s.setup;
  const Derivs d = derivatives(s, node);
  return point_geometry(st.profile.jet(s.u[node]), d.p, d.uxx, trans_term(st, node, d), st.n(),
                        st.leaf.K_M(), node, st.x(node));
}

} // namespace

Principal second_fundamental(const GraphState &s, std::size_t node) { return point_at(s, node).k; }

double mean_curvature_trace(const GraphState &s, std::size_t node) { return point_at(s, node).H; }

double norm_A_squared(const GraphState &s, std::size_t node) { return point_at(s, node).A2; }

AmbientRicci ambient_ricci_nu(const GraphState &s, std::size_t node) {
  const PointGeometry g = point_at(s, node);
  return {g.ric_nu, g.ncc_gap};
}

double flux_divergence(const Setup &st, std::span<const double> q, std::size_t i) {
  const double h = st.h();
  if (st.radial() && i == 0) {
    return st.n() * (q[1] - q[0]) / h;
  }
  return (st.measure_face[i + 1] * q[i + 1] - st.measure_face[i] * q[i]) / (h * st.measure_node[i]);
}

void face_values(std::span<const double> u, double h, std::vector<double> &u_face,
                 std::vector<double> &p_face) {
  const std::size_t n = u.size();
  u_face.resize(n + 1);
  p_face.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    const double ul = at(u, kk - 1), ur = at(u, kk);
    u_face[k] = 0.5 * (ul + ur);
    p_face[k] = (ur - ul) / h;
  }
}

double mean_curvature_divergence(const GraphState &s, std::size_t node) {
  const Setup &st = *s.setup;
  const double q[2] = {face_flux(st, s.u, node, node), face_flux(st, s.u, node + 1, node)};
  double div;
  const double h = st.h();
  if (st.radial() && node == 0) {
    div = st.n() * (q[1] - q[0]) / h;
  } else {
    div = (st.measure_face[node + 1] * q[1] - st.measure_face[node] * q[0]) /
          (h * st.measure_node[node]);
  }
  const Derivs d = derivatives(s, node);
  const warp::Jet j = st.profile.jet(s.u[node]);
  const Tilt tl = tilt_from(j.rho, d.p, node, st.x(node));
  return div + j.d1 * d.p * d.p / (j.rho * j.rho * tl.W) + st.n() * j.d1 / tl.W;
}

GeometrySample sample(const GraphState &s) {
  const Setup &st = *s.setup;
  const std::size_t N = s.size();
  GeometrySample g;
  for (auto *v : {&g.x, &g.p, &g.uxx, &g.rho, &g.rho_p, &g.rho_pp, &g.W, &g.Theta, &g.theta,
                  &g.alpha, &g.k_radial, &g.k_tangential, &g.H, &g.H_div, &g.A2, &g.grad_s2,
                  &g.ric_nu, &g.ncc_gap}) {
    v->resize(N);
  }
  std::vector<double> q(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    q[k] = face_flux(st, s.u, k, std::min(k, N - 1));
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Derivs d = derivatives(s, i);
    const warp::Jet j = st.profile.jet(s.u[i]);
    const PointGeometry pg =
        point_geometry(j, d.p, d.uxx, trans_term(st, i, d), st.n(), st.leaf.K_M(), i, st.x(i));
    g.x[i] = st.x(i);
    g.p[i] = d.p;
    g.uxx[i] = d.uxx;
    g.rho[i] = j.rho;
    g.rho_p[i] = j.d1;
    g.rho_pp[i] = j.d2;
    g.W[i] = pg.tilt.W;
    g.Theta[i] = pg.tilt.Theta;
    g.theta[i] = pg.tilt.theta;
    g.alpha[i] = pg.tilt.alpha;
    g.k_radial[i] = pg.k.radial;
    g.k_tangential[i] = pg.k.tangential;
    g.H[i] = pg.H;
    g.A2[i] = pg.A2;
    g.grad_s2[i] = pg.grad_s2;
    g.ric_nu[i] = pg.ric_nu;
    g.ncc_gap[i] = pg.ncc_gap;
    g.H_div[i] = flux_divergence(st, q, i) + j.d1 * d.p * d.p / (j.rho * j.rho * pg.tilt.W) +
                 st.n() * j.d1 / pg.tilt.W;
  }
  return g;
}

} // namespace grwflow::geom
