#pragma once

// Geometry of the leaf (M, sigma), restricted to constant sectional
// curvature K_M and to one-dimensional reductions of the spatial domain.

namespace grwflow::leaf {

enum class DomainKind {
  interval, // [a, b] x T^{n-1}, flat transversal factor (n = 1: plain interval)
  ball,     // geodesic ball of radius R, radial functions, r in [0, R]
};

struct Domain {
  DomainKind kind = DomainKind::interval;
  double a = 0.0; // 0 for balls
  double b = 1.0; // R for balls

  static Domain interval(double a, double b) { return {DomainKind::interval, a, b}; }
  static Domain ball(double R) { return {DomainKind::ball, 0.0, R}; }
  double length() const { return b - a; }
};

/// chi, chi', chi'' of the Jacobi field chi'' + K chi = 0, chi(0)=0, chi'(0)=1.
struct JacobiJet {
  double chi;
  double d1;
  double d2;
};

struct CutoffJet {
  double xi;
  double d1;
  double d2;
};

class LeafGeometry {
public:
  LeafGeometry(int n, double K_M, Domain domain);

  int n() const { return n_; }
  double K_M() const { return K_M_; }
  const Domain &domain() const { return domain_; }
  bool radial() const { return domain_.kind == DomainKind::ball; }

  JacobiJet jacobi(double r) const;

  /// (n-1) chi'/chi, the first-order coefficient of the radial Laplacian.
  /// Zero on interval (slab) domains. Throws at r = 0 on balls.
  double radial_laplacian_coeff(double r) const;

  /// chi'/chi on balls (throws at r = 0), zero on slabs: the Hessian of a
  /// function of the first coordinate along each transversal unit direction,
  /// per unit first derivative.
  double transversal_coeff(double x) const;

  /// Density of the leaf volume w.r.t. d(first coordinate): chi^{n-1} on
  /// balls, 1 on slabs.
  double measure(double x) const;

  /// xi = varrho^3 with varrho = (C_R - chi(r))_+; requires C_R >= 2 chi(R).
  CutoffJet cutoff(double R, double C_R, double r) const;

  /// Tangential coefficient chi'/chi of DDr = (chi'/chi)(sigma - dr dr).
  double hessian_comparison_gap(double r) const;

  /// min over r in (0, R] of K_M + chi(r); negative values violate the
  /// hypothesis K_M(Dr ^ v) >= -chi(r) of the Hessian comparison theorem.
  double comparison_hypothesis_gap(double R, int samples = 1000) const;

private:
  int n_;
  double K_M_;
  Domain domain_;
};

} // namespace grwflow::leaf
