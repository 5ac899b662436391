#include "grwflow/warp.hpp"

#include "grwflow/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace grwflow::warp {

namespace detail {

// Natural cubic spline on a non-uniform grid; C2 by construction.
struct Spline {
  std::vector<double> s;
  std::vector<double> y;
  std::vector<double> m; // second derivatives at the knots

  Spline(std::vector<double> s_in, std::vector<double> y_in)
      : s(std::move(s_in)), y(std::move(y_in)), m(s.size(), 0.0) {
    const std::size_t n = s.size();
    // Thomas algorithm for the interior second derivatives.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = s[i] - s[i - 1];
      const double h1 = s[i + 1] - s[i];
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = (s[i] - s[i - 1]) / 6.0;
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
  }

  Jet eval(double x) const {
    auto it = std::upper_bound(s.begin(), s.end(), x);
    std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    i = std::min(i, s.size() - 2);
    const double h = s[i + 1] - s[i];
    const double a = (s[i + 1] - x) / h;
    const double b = (x - s[i]) / h;
    const double val = a * y[i] + b * y[i + 1] +
                       ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    const double d1 = (y[i + 1] - y[i]) / h -
                      (3.0 * a * a - 1.0) / 6.0 * h * m[i] +
                      (3.0 * b * b - 1.0) / 6.0 * h * m[i + 1];
    const double d2 = a * m[i] + b * m[i + 1];
    return {val, d1, d2};
  }
};

} // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-12;

struct CatalogEntry {
  const char *name;
  Kind kind;
  double s_minus;
  double s_plus;
};

constexpr CatalogEntry kCatalog[] = {
    {"minkowski_product", Kind::minkowski_product, -kInf, kInf},
    {"minkowski_hyperbolic", Kind::minkowski_hyperbolic, 0.0, kInf},
    {"de_sitter", Kind::de_sitter, -kInf, kInf},
    {"steady_state", Kind::steady_state, -kInf, kInf},
    {"einstein_de_sitter", Kind::einstein_de_sitter, 0.0, kInf},
    {"reference", Kind::reference, 0.0, kInf},
};

template <class F> double integrate(F f, double a, double b) {
  if (a == b) {
    return 0.0;
  }
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, kQuadTol, &err);
  if (!std::isfinite(val) || err > 1e-9 * std::max(1.0, std::abs(val))) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "] (error estimate "
       << err << ")";
    throw QuadratureError(os.str());
  }
  return val;
}

} // namespace

const std::vector<std::string> &WarpProfile::catalog_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto &e : kCatalog) {
      v.emplace_back(e.name);
    }
    return v;
  }();
  return names;
}

WarpProfile WarpProfile::catalog(std::string_view name, std::optional<double> s_base) {
  for (const auto &e : kCatalog) {
    if (name == e.name) {
      WarpProfile p;
      p.kind_ = e.kind;
      p.name_ = e.name;
      p.s_minus_ = e.s_minus;
      p.s_plus_ = e.s_plus;
      p.s_base_ = s_base.value_or(p.contains(0.0) ? 0.0 : 1.0);
      p.require_inside(p.s_base_, "s_base");
      return p;
    }
  }
  throw DomainError("unknown warping profile '" + std::string(name) + "'");
}

WarpProfile WarpProfile::from_table(std::vector<double> s, std::vector<double> rho,
                                    std::optional<double> s_base) {
  if (s.size() != rho.size()) {
    throw DomainError("table columns have different lengths");
  }
  if (s.size() < 4) {
    throw DomainError("table profile needs at least 4 points, got " + std::to_string(s.size()));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(rho[i] > 0.0) || !std::isfinite(rho[i])) {
      throw DomainError("non-positive rho sample at s=" + std::to_string(s[i]));
    }
    if (i > 0 && !(s[i] > s[i - 1])) {
      throw DomainError("table abscissae must be strictly increasing (row " +
                        std::to_string(i) + ")");
    }
  }
  WarpProfile p;
  p.kind_ = Kind::table;
  p.name_ = "table";
  p.s_minus_ = s.front();
  p.s_plus_ = s.back();
  p.s_base_ = s_base.value_or(0.5 * (s.front() + s.back()));
  p.spline_ = std::make_shared<const detail::Spline>(std::move(s), std::move(rho));
  p.require_inside(p.s_base_, "s_base");
  return p;
}

WarpProfile WarpProfile::load_table(const std::string &path, std::optional<double> s_base) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("cannot open profile table '" + path + "'");
  }
  std::vector<double> s, rho;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a)) {
      continue; // blank or comment-only
    }
    std::string extra;
    if (!(ls >> b) || (ls >> extra)) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected two columns");
    }
    s.push_back(a);
    rho.push_back(b);
  }
  return from_table(std::move(s), std::move(rho), s_base);
}

WarpProfile WarpProfile::with_base(double s_base) const {
  WarpProfile p = *this;
  p.require_inside(s_base, "s_base");
  p.s_base_ = s_base;
  return p;
}

bool WarpProfile::contains(double s) const {
  if (kind_ == Kind::table) {
    return s >= s_minus_ && s <= s_plus_;
  }
  return s > s_minus_ && s < s_plus_;
}

void WarpProfile::require_inside(double s, const char *what) const {
  // exp(s - e^-s) is smooth through s = 0, so the endpoint can still be sampled
  const bool closed_end = kind_ == Kind::reference && s == s_minus_;
  if (!std::isfinite(s) || !(contains(s) || closed_end)) {
    std::ostringstream os;
    os << what << "=" << s << " outside I=(" << s_minus_ << ", " << s_plus_ << ") of profile "
       << name_;
    throw DomainError(os.str());
  }
}

Jet WarpProfile::jet(double s) const {
  require_inside(s, "s");
  switch (kind_) {
  case Kind::minkowski_product:
    return {1.0, 0.0, 0.0};
  case Kind::minkowski_hyperbolic:
    return {s, 1.0, 0.0};
  case Kind::de_sitter:
    return {std::cosh(s), std::sinh(s), std::cosh(s)};
  case Kind::steady_state: {
    const double e = std::exp(s);
    return {e, e, e};
  }
  case Kind::einstein_de_sitter: {
    const double c = std::cbrt(s);
    return {c * c, 2.0 / (3.0 * c), -2.0 / (9.0 * s * c)};
  }
  case Kind::reference: {
    const double em = std::exp(-s);
    const double r = std::exp(s - em);
    const double q = 1.0 + em;
    return {r, r * q, r * (q * q - em)};
  }
  case Kind::table:
    return spline_->eval(s);
  }
  return {0.0, 0.0, 0.0};
}

double conformal_parameter(const WarpProfile &p, double s) {
  p.require_inside(s, "s");
  const double b = p.s_base_;
  switch (p.kind_) {
  case Kind::minkowski_product:
    return s - b;
  case Kind::minkowski_hyperbolic:
    return std::log(s / b);
  case Kind::de_sitter:
    return std::atan(std::sinh(s)) - std::atan(std::sinh(b));
  case Kind::steady_state:
    return std::exp(-b) - std::exp(-s);
  case Kind::einstein_de_sitter:
    return 3.0 * (std::cbrt(s) - std::cbrt(b));
  case Kind::reference:
    return std::exp(std::exp(-b)) - std::exp(std::exp(-s));
  case Kind::table:
    return integrate([&](double r) { return 1.0 / p.rho(r); }, b, s);
  }
  return 0.0;
}

double conformal_parameter_inverse(const WarpProfile &p, double z) {
  const double b = p.s_base_;
  auto out_of_range = [&] {
    std::ostringstream os;
    os << "conformal parameter " << z << " outside varsigma(I) for profile " << p.name_;
    return DomainError(os.str());
  };
  if (!std::isfinite(z)) {
    throw out_of_range();
  }
  double s = 0.0;
  switch (p.kind_) {
  case Kind::minkowski_product:
    s = b + z;
    break;
  case Kind::minkowski_hyperbolic:
    s = b * std::exp(z);
    break;
  case Kind::de_sitter: {
    const double g = z + std::atan(std::sinh(b));
    if (std::abs(g) >= M_PI / 2) {
      throw out_of_range();
    }
    s = std::asinh(std::tan(g));
    break;
  }
  case Kind::steady_state: {
    const double w = std::exp(-b) - z;
    if (!(w > 0.0)) {
      throw out_of_range();
    }
    s = -std::log(w);
    break;
  }
  case Kind::einstein_de_sitter: {
    const double c = std::cbrt(b) + z / 3.0;
    if (!(c > 0.0)) {
      throw out_of_range();
    }
    s = c * c * c;
    break;
  }
  case Kind::reference: {
    const double w = std::exp(std::exp(-b)) - z;
    if (!(w > 1.0)) {
      throw out_of_range();
    }
    s = -std::log(std::log(w));
    break;
  }
  case Kind::table: {
    const double lo = conformal_parameter(p, p.s_minus_);
    const double hi = conformal_parameter(p, p.s_plus_);
    if (z < lo || z > hi) {
      throw out_of_range();
    }
    auto f = [&](double x) { return conformal_parameter(p, x) - z; };
    std::uintmax_t iters = 200;
    auto tol = [](double l, double r) { return std::abs(r - l) <= 1e-14 * std::max(1.0, std::abs(l)); };
    auto [l, r] = boost::math::tools::toms748_solve(f, p.s_minus_, p.s_plus_, lo - z, hi - z, tol, iters);
    s = 0.5 * (l + r);
    break;
  }
  }
  if (!p.contains(s)) {
    throw out_of_range();
  }
  return s;
}

double primitive_phi(const WarpProfile &p, double s) {
  p.require_inside(s, "s");
  const double b = p.s_base_;
  switch (p.kind_) {
  case Kind::minkowski_product:
    return s - b;
  case Kind::minkowski_hyperbolic:
    return 0.5 * (s * s - b * b);
  case Kind::de_sitter:
    return std::sinh(s) - std::sinh(b);
  case Kind::steady_state:
    return std::exp(s) - std::exp(b);
  case Kind::einstein_de_sitter:
    return 0.6 * (std::pow(s, 5.0 / 3.0) - std::pow(b, 5.0 / 3.0));
  case Kind::reference:
  case Kind::table:
    return integrate([&](double r) { return p.rho(r); }, b, s);
  }
  return 0.0;
}

double kappa(const WarpProfile &p, double s, double C0) {
  p.require_inside(s, "s");
  const double b = p.s_base_;
  const double lo = std::min(s, b), hi = std::max(s, b);
  // kappa is only defined while rho' stays positive between s_base and s.
  // Closed-form kinds have a known sign pattern; tables are probed.
  auto reject = [&](double x) {
    std::ostringstream os;
    os << "kappa undefined: rho' = " << p.rho_prime(x) << " at s=" << x << " for profile "
       << p.name_;
    throw DomainError(os.str());
  };
  if (p.kind_ == Kind::minkowski_product) {
    reject(lo);
  } else if (p.kind_ == Kind::de_sitter && !(lo > 0.0)) {
    reject(std::min(lo, 0.0));
  } else if (p.kind_ == Kind::table) {
    constexpr int kProbe = 257;
    for (int k = 0; k < kProbe; ++k) {
      const double x = lo + (hi - lo) * k / (kProbe - 1);
      if (!(p.rho_prime(x) > 0.0)) {
        reject(x);
      }
    }
  }
  auto softplus = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  switch (p.kind_) {
  case Kind::minkowski_product:
    break; // unreachable, rho' == 0 rejected above
  case Kind::minkowski_hyperbolic:
    return C0 * 0.5 * (s * s - b * b);
  case Kind::de_sitter:
    return C0 * std::log(std::sinh(s) / std::sinh(b));
  case Kind::steady_state:
    return C0 * (s - b);
  case Kind::einstein_de_sitter:
    return C0 * 0.75 * (s * s - b * b);
  case Kind::reference:
    return C0 * (softplus(s) - softplus(b));
  case Kind::table:
    return C0 * integrate(
                    [&](double r) {
                      const Jet j = p.jet(r);
                      return j.rho / j.d1;
                    },
                    b, s);
  }
  return 0.0;
}

HypothesisReport hypothesis_check(const WarpProfile &p, double a, double b, double tol,
                                  LeafCurvature leaf, int samples) {
  if (!(a < b)) {
    throw DomainError("hypothesis_check needs a < b");
  }
  if (!p.contains(a) || !p.contains(b)) {
    std::ostringstream os;
    os << "range [" << a << ", " << b << "] not inside I of profile " << p.name();
    throw DomainError(os.str());
  }
  samples = std::max(samples, 2);
  HypothesisReport r;
  r.a = a;
  r.b = b;
  r.rho_prime_nonneg = true;
  r.ratio_nonincreasing = true;
  r.C_minus_eff = -kInf;
  r.C_plus_eff = kInf;
  r.lambda_eff = -kInf;
  r.ncc_gap_min = kInf;
  for (int k = 0; k < samples; ++k) {
    const double s = a + (b - a) * k / (samples - 1);
    const Jet j = p.jet(s);
    const double q = j.log_derivative();
    const double dq = j.log_derivative_slope();
    r.rho_prime_nonneg = r.rho_prime_nonneg && j.d1 >= -tol;
    r.ratio_nonincreasing = r.ratio_nonincreasing && dq <= tol;
    r.strict_somewhere = r.strict_somewhere || dq < -tol;
    r.C_minus_eff = std::max(r.C_minus_eff, q);
    r.C_plus_eff = std::min(r.C_plus_eff, q);
    r.lambda_eff = std::max(r.lambda_eff, -j.d2 / j.rho);
    const double gap = (leaf.n - 1) * (leaf.K_M - j.rho * j.rho * dq);
    r.ncc_gap_min = std::min(r.ncc_gap_min, gap + 0.0);
  }
  return r;
}

} // namespace grwflow::warp
