#pragma once

// Warping functions rho(s) of the spacetime -I x_rho M and the scalar
// primitives built from them.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grwflow::warp {

enum class Kind {
  minkowski_product,    // rho = 1,          I = R
  minkowski_hyperbolic, // rho = s,          I = (0, inf)
  de_sitter,            // rho = cosh s,     I = R
  steady_state,         // rho = e^s,        I = R
  einstein_de_sitter,   // rho = s^(2/3),    I = (0, inf)
  reference,            // rho = exp(s - e^-s), I = (0, inf)
  table,                // natural cubic spline through (s, rho) samples
};

/// rho together with its first two derivatives at one point.
struct Jet {
  double rho;
  double d1;
  double d2;

  /// rho'/rho, the mean curvature of the slice {s} x M divided by n.
  double log_derivative() const { return d1 / rho; }
  /// (rho'/rho)' = rho''/rho - (rho'/rho)^2.
  double log_derivative_slope() const {
    const double q = d1 / rho;
    return d2 / rho - q * q;
  }
};

namespace detail {
struct Spline;
}

/// Immutable warping profile. Copies share the (read-only) table data, so a
/// profile can be handed to concurrent runs freely.
class WarpProfile {
public:
  static WarpProfile catalog(std::string_view name,
                             std::optional<double> s_base = std::nullopt);
  /// Samples must be strictly increasing in s and strictly positive in rho,
  /// with at least 4 points.
  static WarpProfile from_table(std::vector<double> s, std::vector<double> rho,
                                std::optional<double> s_base = std::nullopt);
  /// Two whitespace separated columns (s, rho); '#' starts a comment.
  static WarpProfile load_table(const std::string &path,
                                std::optional<double> s_base = std::nullopt);

  static const std::vector<std::string> &catalog_names();

  Kind kind() const { return kind_; }
  const std::string &name() const { return name_; }
  double s_minus() const { return s_minus_; }
  double s_plus() const { return s_plus_; }
  double s_base() const { return s_base_; }

  /// Same profile with a different base point for the integral primitives.
  WarpProfile with_base(double s_base) const;

  /// Open interval for catalog entries, the closed sample range for tables.
  bool contains(double s) const;

  Jet jet(double s) const;
  double rho(double s) const { return jet(s).rho; }
  double rho_prime(double s) const { return jet(s).d1; }
  double rho_second(double s) const { return jet(s).d2; }

private:
  WarpProfile() = default;
  void require_inside(double s, const char *what) const;

  Kind kind_ = Kind::minkowski_product;
  std::string name_;
  double s_minus_ = 0.0;
  double s_plus_ = 0.0;
  double s_base_ = 0.0;
  std::shared_ptr<const detail::Spline> spline_;

  friend double conformal_parameter(const WarpProfile &, double);
  friend double conformal_parameter_inverse(const WarpProfile &, double);
  friend double primitive_phi(const WarpProfile &, double);
  friend double kappa(const WarpProfile &, double, double);
};

/// varsigma(s) = int_{s_base}^{s} dr / rho(r).
double conformal_parameter(const WarpProfile &p, double s);
/// Inverse of conformal_parameter; throws DomainError outside varsigma(I).
double conformal_parameter_inverse(const WarpProfile &p, double z);
/// phi(s) = int_{s_base}^{s} rho(r) dr.
double primitive_phi(const WarpProfile &p, double s);
/// kappa(s) = C0 int_{s_base}^{s} rho/rho' dr. Rejects paths where rho' <= 0.
double kappa(const WarpProfile &p, double s, double C0);

/// Leaf data the null convergence condition depends on.
struct LeafCurvature {
  int n = 1;
  double K_M = 0.0;
};

struct HypothesisReport {
  double a = 0.0;
  double b = 0.0;
  bool rho_prime_nonneg = false;
  bool ratio_nonincreasing = false;
  bool strict_somewhere = false;
  double C_minus_eff = 0.0; // sup of rho'/rho on [a, b]
  double C_plus_eff = 0.0;  // inf of rho'/rho on [a, b]
  double lambda_eff = 0.0;  // sup of -rho''/rho on [a, b]
  double ncc_gap_min = 0.0; // min of (n-1)(K_M - rho^2 (rho'/rho)')

  bool ncc_holds(double tol) const { return ncc_gap_min >= -tol; }
  /// Non-strict monotonicity hypothesis, enough for the maximum principle.
  bool monotone() const { return rho_prime_nonneg && ratio_nonincreasing; }
};

HypothesisReport hypothesis_check(const WarpProfile &p, double a, double b,
                                  double tol, LeafCurvature leaf = {},
                                  int samples = 2001);

} // namespace grwflow::warp
