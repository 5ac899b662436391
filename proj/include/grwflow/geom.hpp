#pragma once

// Pointwise differential geometry of the spacelike graph s = u(x) over the
// leaf, on a uniform node-centred grid with mirror ghost nodes.

#include "grwflow/leaf.hpp"
#include "grwflow/warp.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace grwflow::geom {

/// Everything a graph state refers to but never changes during a run.
struct Setup {
  warp::WarpProfile profile;
  leaf::LeafGeometry leaf;
  std::size_t points;

  Setup(warp::WarpProfile p, leaf::LeafGeometry l, std::size_t n_points);

  double h() const { return leaf.domain().length() / static_cast<double>(points - 1); }
  double x(std::size_t i) const { return leaf.domain().a + static_cast<double>(i) * h(); }
  int n() const { return leaf.n(); }
  bool radial() const { return leaf.radial(); }

  // Leaf measure at nodes and faces (face k at x_{k-1/2}), and chi'/chi at
  // nodes (0 at a ball's origin, where the L'Hopital limit is used).
  std::vector<double> measure_node;
  std::vector<double> measure_face;
  std::vector<double> trans_node;
};

struct GraphState {
  std::shared_ptr<const Setup> setup;
  double t = 0.0;
  std::vector<double> u;

  std::size_t size() const { return u.size(); }
};

/// First and second spatial differences of u at a node; boundary nodes use
/// the mirror ghost (homogeneous Neumann), so p is exactly 0 there.
struct Derivs {
  double p;   // u_x or u_r
  double uxx; // u_xx or u_rr
};

Derivs derivatives(std::span<const double> u, std::size_t i, double h);

/// Samples a one-dimensional function f on the grid the same way.
inline Derivs derivatives(const GraphState &s, std::size_t i) {
  return derivatives(s.u, i, s.setup->h());
}

struct Tilt {
  double W;     // sqrt(rho^2 - |Du|^2)
  double Theta; // support function rho^2 / W
  double theta; // Theta / rho
  double alpha; // hyperbolic angle, arccosh(theta)
};

/// Throws NotSpacelike (node, x reported as given) when |Du| >= rho.
Tilt tilt_from(double rho, double grad, std::size_t node = 0, double x = 0.0);
Tilt tilt(const GraphState &s, std::size_t node);

/// Principal curvatures w.r.t. the induced metric: along the coordinate
/// direction, and along each of the n-1 transversal directions (equal by
/// symmetry).
struct Principal {
  double radial;
  double tangential;
};

Principal second_fundamental(const GraphState &s, std::size_t node);
double mean_curvature_trace(const GraphState &s, std::size_t node);
/// Conservative flux form: div(Du/(rho W)) + rho'|Du|^2/(rho^2 W) + n rho'/W.
double mean_curvature_divergence(const GraphState &s, std::size_t node);
double norm_A_squared(const GraphState &s, std::size_t node);

struct AmbientRicci {
  double ric_nu;  // Ric(nu, nu) of the spacetime
  double ncc_gap; // Ric(nu, nu) + n rho''/rho
};
AmbientRicci ambient_ricci_nu(const GraphState &s, std::size_t node);

/// Per-node derived quantities of one state.
struct GeometrySample {
  std::vector<double> x;
  std::vector<double> p;     // u_x
  std::vector<double> uxx;
  std::vector<double> rho;
  std::vector<double> rho_p;
  std::vector<double> rho_pp;
  std::vector<double> W;
  std::vector<double> Theta;
  std::vector<double> theta;
  std::vector<double> alpha;
  std::vector<double> k_radial;
  std::vector<double> k_tangential;
  std::vector<double> H;     // trace form
  std::vector<double> H_div; // divergence form
  std::vector<double> A2;
  std::vector<double> grad_s2;
  std::vector<double> ric_nu;
  std::vector<double> ncc_gap;
};

GeometrySample sample(const GraphState &s);

/// Everything at one node from its local data. trans_p is the transversal
/// Hessian term (chi'/chi) u_r, or its limit u_rr at the origin of a ball.
struct PointGeometry {
  Tilt tilt;
  Principal k;
  double H;
  double A2;
  double grad_s2;
  double ric_nu;
  double ncc_gap;
};

PointGeometry point_geometry(const warp::Jet &jet, double p, double uxx, double trans_p, int n,
                             double K_M, std::size_t node = 0, double x = 0.0);

/// Divergence-form operator (1/m)(m q)_x over faces, m the leaf measure.
/// `face_flux[k]` is q at x_{k+1/2} for k = -1..N-1 stored with offset 1
/// (size N+1, mirror ghosts included). Radial origin uses n * 2 q_{1/2}/h.
double flux_divergence(const Setup &setup, std::span<const double> face_flux, std::size_t i);

/// Face values of u and u_x including the mirror ghost faces (size N+1,
/// face k+1/2 stored at index k+1).
void face_values(std::span<const double> u, double h, std::vector<double> &u_face,
                 std::vector<double> &p_face);

} // namespace grwflow::geom
