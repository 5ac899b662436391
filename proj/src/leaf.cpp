#include "grwflow/leaf.hpp"

#include "grwflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace grwflow::leaf {

LeafGeometry::LeafGeometry(int n, double K_M, Domain domain)
    : n_(n), K_M_(K_M), domain_(domain) {
  if (n < 1) {
    throw DomainError("leaf dimension n must be >= 1");
  }
  if (!std::isfinite(K_M)) {
    throw DomainError("K_M must be finite");
  }
  if (!(domain.b > domain.a)) {
    throw DomainError("empty spatial domain");
  }
  if (domain.kind == DomainKind::interval) {
    if (n >= 2 && K_M != 0.0) {
      throw DomainError("interval domains with n >= 2 are flat slabs; K_M must be 0");
    }
    return;
  }
  if (domain.a != 0.0) {
    throw DomainError("ball domains start at r = 0");
  }
  const double R = domain.b;
  if (K_M > 0.0 && !(R < M_PI / (2.0 * std::sqrt(K_M)))) {
    std::ostringstream os;
    os << "geodesic ball of radius " << R << " is not convex for K_M=" << K_M
       << " (need R < pi/(2 sqrt K_M))";
    throw DomainError(os.str());
  }
}

JacobiJet LeafGeometry::jacobi(double r) const {
  if (K_M_ == 0.0) {
    return {r, 1.0, 0.0};
  }
  if (K_M_ > 0.0) {
    const double k = std::sqrt(K_M_);
    return {std::sin(k * r) / k, std::cos(k * r), -k * std::sin(k * r)};
  }
  const double k = std::sqrt(-K_M_);
  return {std::sinh(k * r) / k, std::cosh(k * r), k * std::sinh(k * r)};
}

double LeafGeometry::transversal_coeff(double x) const {
  if (!radial()) {
    return 0.0;
  }
  if (!(x > 0.0)) {
    throw DomainError("chi'/chi is singular at r = 0");
  }
  const JacobiJet j = jacobi(x);
  return j.d1 / j.chi;
}

double LeafGeometry::radial_laplacian_coeff(double r) const {
  if (n_ == 1 || !radial()) {
    return 0.0;
  }
  return (n_ - 1) * transversal_coeff(r);
}

double LeafGeometry::measure(double x) const {
  if (!radial() || n_ == 1) {
    return 1.0;
  }
  return std::pow(jacobi(x).chi, n_ - 1);
}

CutoffJet LeafGeometry::cutoff(double R, double C_R, double r) const {
  if (C_R < 2.0 * jacobi(R).chi) {
    std::ostringstream os;
    os << "cutoff constant C_R=" << C_R << " below 2 chi(R)=" << 2.0 * jacobi(R).chi;
    throw DomainError(os.str());
  }
  const JacobiJet j = jacobi(r);
  const double v = C_R - j.chi;
  if (v <= 0.0) {
    return {0.0, 0.0, 0.0};
  }
  return {v * v * v, -3.0 * v * v * j.d1, 6.0 * v * j.d1 * j.d1 - 3.0 * v * v * j.d2};
}

double LeafGeometry::hessian_comparison_gap(double r) const {
  if (!(r > 0.0)) {
    throw DomainError("Hessian of r is singular at r = 0");
  }
  const JacobiJet j = jacobi(r);
  return j.d1 / j.chi;
}

double LeafGeometry::comparison_hypothesis_gap(double R, int samples) const {
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= samples; ++k) {
    const double r = R * k / samples;
    gap = std::min(gap, K_M_ + jacobi(r).chi);
  }
  return gap;
}

} // namespace grwflow::leaf
