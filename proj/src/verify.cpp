#include "grwflow/verify.hpp"

#include "grwflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace grwflow::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double scale(double bound) { return std::max(1.0, std::abs(bound)); }
double upper_margin(double bound, double measured) { return (bound - measured) / scale(bound); }
double lower_margin(double bound, double measured) { return (measured - bound) / scale(bound); }

double max_of(const std::vector<double> &v) { return *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double> &v) { return *std::min_element(v.begin(), v.end()); }

} // namespace

TheoremConstants theorem_constants(const geom::GraphState &initial, double T, double eps_slack) {
  const geom::Setup &st = *initial.setup;
  const warp::WarpProfile &p = st.profile;
  const geom::GeometrySample g = geom::sample(initial);
  TheoremConstants k;
  k.T = T;
  k.n = st.n();
  k.eps_slack = eps_slack;
  k.min_u0 = min_of(initial.u);
  k.max_u0 = max_of(initial.u);
  k.min_rho0 = min_of(g.rho);
  k.max_rho0 = max_of(g.rho);
  k.min_H0 = min_of(g.H);
  k.max_abs_H0 = 0.0;
  k.min_v0_sq = kInf;
  for (std::size_t i = 0; i < g.H.size(); ++i) {
    k.max_abs_H0 = std::max(k.max_abs_H0, std::abs(g.H[i]));
    const double v = g.H[i] / g.Theta[i];
    k.min_v0_sq = std::min(k.min_v0_sq, v * v);
  }
  k.max_theta0 = max_of(g.theta);

  // Reachable range: [min u0, max u0 + C_- n T], with C_- taken over that
  // same range (a fixed point; one pass when rho'/rho is non-increasing).
  const double tol = 1e-10;
  const warp::LeafCurvature lc{st.n(), st.leaf.K_M()};
  const double a = k.min_u0;
  auto top = [&](double C) {
    double b = k.max_u0 + std::max(C, 0.0) * k.n * T;
    const double floor_gap = 1e-6 * std::max(1.0, std::abs(a));
    if (b - a < floor_gap) {
      b = a + floor_gap; // degenerate range (constant data, static slice)
    }
    if (!p.contains(b)) {
      b = std::min(b, p.s_plus());
    }
    return b;
  };
  double b = top(0.0);
  warp::HypothesisReport h = warp::hypothesis_check(p, a, b, tol, lc);
  for (int it = 0; it < 100; ++it) {
    const double nb = top(h.C_minus_eff);
    if (std::abs(nb - b) <= 1e-13 * std::max(1.0, std::abs(b))) {
      break;
    }
    b = nb;
    h = warp::hypothesis_check(p, a, b, tol, lc);
  }
  k.hyp = h;
  k.C_minus_eff = h.C_minus_eff;
  k.C_plus_eff = h.C_plus_eff;
  k.lambda_eff = h.lambda_eff;
  k.ncc = h.ncc_holds(tol);

  k.C1 = k.max_abs_H0 * std::exp(k.n * k.C_minus_eff * k.C_minus_eff * T);
  if (k.C1 > 0.0) {
    const double E = k.n / (2.0 * k.C1);
    double m = -kInf;
    for (std::size_t i = 0; i < initial.size(); ++i) {
      m = std::max(m, E * g.Theta[i] - warp::primitive_phi(p, initial.u[i]));
    }
    k.E = E;
    // phi is increasing (rho > 0), so its max over the range sits at b.
    k.M = m + warp::primitive_phi(p, h.b);
  }
  k.script_M = 2.0 * k.C_minus_eff * k.C1 * T + k.max_theta0;
  k.beta = 4.0 * k.C_minus_eff * k.C1;
  return k;
}

const char *to_string(Status s) {
  switch (s) {
  case Status::pass:
    return "pass";
  case Status::fail:
    return "fail";
  case Status::not_applicable:
    return "not-applicable";
  case Status::diagnostic:
    return "diagnostic";
  }
  return "?";
}

void BoundLedger::declare(const std::string &id, Kind kind, bool applicable, std::string note) {
  if (has(id)) {
    throw Error("check declared twice: " + id);
  }
  index_[id] = entries_.size();
  order_.push_back(id);
  entries_.push_back({kind, applicable, false, std::move(note), kInf, 0.0, 0});
}

void BoundLedger::record(const std::string &id, double t, double margin) {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error("unknown check: " + id);
  }
  Entry &e = entries_[it->second];
  ++e.samples;
  // NaN margins count as the worst possible value.
  if (std::isnan(margin) || margin < e.min_margin || e.samples == 1) {
    e.min_margin = std::isnan(margin) ? -kInf : margin;
    e.t_min = t;
  }
}

void BoundLedger::set_failed(const std::string &id, std::string note) {
  Entry &e = entries_.at(index_.at(id));
  e.failed = true;
  e.note = std::move(note);
}

Status BoundLedger::status(const std::string &id) const {
  const Entry &e = entries_.at(index_.at(id));
  if (!e.applicable) {
    return Status::not_applicable;
  }
  if (e.kind == Kind::diagnostic) {
    return Status::diagnostic;
  }
  if (e.failed) {
    return Status::fail;
  }
  if (e.samples == 0) {
    return Status::pass;
  }
  const bool ok = e.kind == Kind::strict ? e.min_margin > 0.0 : e.min_margin >= -slack;
  return ok ? Status::pass : Status::fail;
}

double BoundLedger::min_margin(const std::string &id) const {
  const Entry &e = entries_.at(index_.at(id));
  return e.samples == 0 ? kNaN : e.min_margin;
}

double BoundLedger::t_of_min_margin(const std::string &id) const {
  const Entry &e = entries_.at(index_.at(id));
  return e.samples == 0 ? kNaN : e.t_min;
}

const std::string &BoundLedger::note(const std::string &id) const {
  return entries_.at(index_.at(id)).note;
}

bool BoundLedger::all_pass() const {
  for (const auto &id : order_) {
    if (status(id) == Status::fail) {
      return false;
    }
  }
  return true;
}

namespace {

struct Rule {
  BoundLedger::Kind kind;
  bool applicable;
  std::string note;
};

Rule rule_for(const std::string &id, const TheoremConstants &k, bool companions, bool ball,
              double defect0) {
  using K = BoundLedger::Kind;
  const bool mono = k.monotone();
  const std::string no_mono = "rho' >= 0 and non-increasing rho'/rho do not both hold on the "
                              "reachable range";
  auto need = [&](bool ok, const std::string &why) {
    return Rule{K::bound, ok, ok ? std::string() : why};
  };
  if (id == "height" || id == "rho" || id == "osc_monotone" || id == "slice_osc") {
    return need(mono, no_mono);
  }
  if (id == "height_refined") {
    if (!mono) {
      return need(false, no_mono);
    }
    if (k.min_u0 < 0.0) {
      return need(false, "refined height bound needs min u0 >= 0");
    }
    return need(k.C_plus_eff > 0.0, "refined height bound needs C_plus > 0");
  }
  const std::string no_ncc = "null convergence condition fails on the reachable range";
  if (id == "tilt" || id == "gradient" || id == "H_bound" || id == "H_schedule" ||
      id == "ncc_node") {
    return need(mono && k.ncc, mono ? no_ncc : no_mono);
  }
  if (id == "gradient_refined" || id == "E_Theta") {
    if (!(mono && k.ncc)) {
      return need(false, mono ? no_ncc : no_mono);
    }
    return need(k.C1 > 0.0, "C1 = 0, so E and M are undefined");
  }
  if (id == "H_positive" || id == "mean_convexity") {
    if (!(mono && k.ncc)) {
      return need(false, mono ? no_ncc : no_mono);
    }
    Rule r = need(k.min_H0 > 0.0, "initial surface is not mean convex");
    if (id == "H_positive") {
      r.kind = K::strict;
    }
    return r;
  }
  if (id == "heat_s") {
    return {K::strict, k.C_plus_eff > 0.0,
            k.C_plus_eff > 0.0 ? "" : "rho' > 0 fails somewhere on the reachable range"};
  }
  if (id == "avoidance") {
    return {K::strict, companions, companions ? "" : "companion slices leave I"};
  }
  if (id == "defect_decay") {
    if (!mono || !k.hyp.strict_somewhere) {
      return need(false, "needs the monotonicity hypothesis with strict decrease somewhere");
    }
    Rule r = need(defect0 > 0.0, "initial conformal defect is 0");
    r.kind = K::strict;
    return r;
  }
  if (id == "cutoff_A2" || id == "cutoff_boundary") {
    return {K::diagnostic, ball, ball ? "" : "cutoff is defined on balls only"};
  }
  // tilt_t, conformal_defect, boundary_defect
  return {K::diagnostic, true, ""};
}

} // namespace

const std::vector<std::string> &check_ids() {
  static const std::vector<std::string> ids = {
      "height",       "height_refined", "rho",          "tilt",           "gradient",
      "gradient_refined", "E_Theta",    "H_bound",      "H_schedule",     "H_positive",
      "mean_convexity", "ncc_node",     "heat_s",       "avoidance",      "slice_osc",
      "osc_monotone", "defect_decay",   "tilt_t",       "conformal_defect", "boundary_defect",
      "cutoff_A2",    "cutoff_boundary"};
  return ids;
}

std::vector<std::pair<std::string, double>>
evaluate_bounds(const geom::GraphState &state, const geom::GeometrySample &g,
                const TheoremConstants &k, const std::optional<Companions> &companions) {
  std::vector<std::pair<std::string, double>> out;
  const double t = state.t;
  const double n = k.n;
  const double umin = min_of(state.u), umax = max_of(state.u);
  const double rmin = min_of(g.rho), rmax = max_of(g.rho);
  const double theta_max = max_of(g.theta);
  double grad_ratio = 0.0, Habs = 0.0, Theta_max = 0.0, v2min = kInf, ncc_min = kInf,
         heat_s_min = kInf;
  for (std::size_t i = 0; i < g.H.size(); ++i) {
    grad_ratio = std::max(grad_ratio, std::abs(g.p[i]) / g.rho[i]);
    Habs = std::max(Habs, std::abs(g.H[i]));
    Theta_max = std::max(Theta_max, g.Theta[i]);
    const double v = g.H[i] / g.Theta[i];
    v2min = std::min(v2min, v * v);
    ncc_min = std::min(ncc_min, g.ncc_gap[i]);
    heat_s_min = std::min(heat_s_min, g.rho_p[i] / g.rho[i] * (n + g.grad_s2[i]));
  }
  const double Cm = k.C_minus_eff, Cp = k.C_plus_eff;
  const bool mono = k.monotone();

  if (mono) {
    const double lo = k.min_u0 + Cp * n * t, hi = k.max_u0 + Cm * n * t;
    out.emplace_back("height", std::min(lower_margin(lo, umin), upper_margin(hi, umax)));
    if (k.min_u0 >= 0.0 && Cp > 0.0) {
      const double rlo = Cp / Cm * k.min_u0 + Cp * n * t;
      const double rhi = Cm / Cp * k.max_u0 + Cm * n * t;
      out.emplace_back("height_refined",
                       std::min(lower_margin(rlo, umin), upper_margin(rhi, umax)));
    }
    const double plo = std::exp(Cp * Cp * n * t) * k.min_rho0;
    const double phi = std::exp(Cm * Cm * n * t) * k.max_rho0;
    out.emplace_back("rho", std::min(lower_margin(plo, rmin), upper_margin(phi, rmax)));
  }
  if (mono && k.ncc) {
    out.emplace_back("tilt", upper_margin(k.script_M, theta_max));
    out.emplace_back("gradient",
                     upper_margin(std::sqrt(1.0 - 1.0 / (k.script_M * k.script_M)), grad_ratio));
    out.emplace_back("H_bound", upper_margin(k.C1, Habs));
    out.emplace_back("ncc_node", ncc_min);
    if (k.E && k.M) {
      const double E = *k.E, M = *k.M;
      const double arg =
          1.0 - E * E / (M * M) * std::exp(2.0 * Cp * Cp * n * t) * k.min_rho0 * k.min_rho0;
      out.emplace_back("gradient_refined", upper_margin(std::sqrt(std::max(arg, 0.0)), grad_ratio));
      out.emplace_back("E_Theta", upper_margin(M, E * Theta_max));
    }
    if (k.min_H0 > 0.0) {
      out.emplace_back("H_positive", min_of(g.H));
      const double floor = std::exp(-(k.beta + 2.0 * n * k.lambda_eff) * t) * k.min_v0_sq;
      out.emplace_back("mean_convexity", (v2min - floor) / floor);
    }
    out.emplace_back("tilt_t", upper_margin(2.0 * Cm * k.C1 * t + k.max_theta0, theta_max));
  }
  if (Cp > 0.0) {
    out.emplace_back("heat_s", heat_s_min);
  }
  if (companions) {
    out.emplace_back("avoidance", std::min(lower_margin(companions->lower, umin),
                                           upper_margin(companions->upper, umax)));
  }
  return out;
}

ComparisonResult ode_comparison(const std::vector<double> &t, const std::vector<double> &f,
                                const std::function<double(double)> &F, double gamma0,
                                double eps_slack) {
  if (t.size() != f.size() || t.empty()) {
    throw Error("ode_comparison needs matching, non-empty series");
  }
  ComparisonResult r;
  const double blowup = 1e15 * std::max(1.0, std::abs(gamma0));
  double g = gamma0;
  auto visit = [&](std::size_t i) {
    const double m = (g - f[i]) / std::max(1.0, std::abs(g));
    r.gamma.push_back(g);
    r.margin.push_back(m);
    if (r.margin.size() == 1 || m < r.min_margin) {
      r.min_margin = m;
      r.t_of_min_margin = t[i];
    }
    if (f[i] > g + eps_slack * std::abs(g)) {
      r.pass = false;
    }
  };
  visit(0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    double tc = t[i - 1];
    while (tc < t[i]) {
      double h = t[i] - tc;
      const double Fg = F(g);
      if (Fg != 0.0) {
        // Relative growth of at most 1e-3 per RK4 sub-step.
        h = std::min(h, 1e-3 * std::max(std::abs(g), 1e-300) / std::abs(Fg));
      }
      const double k1 = Fg;
      const double k2 = F(g + 0.5 * h * k1);
      const double k3 = F(g + 0.5 * h * k2);
      const double k4 = F(g + h * k3);
      g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      tc = (h == t[i] - tc) ? t[i] : tc + h;
      if (!std::isfinite(g) || std::abs(g) > blowup) {
        r.expired = true;
        r.t_expired = tc;
        return r;
      }
    }
    visit(i);
  }
  return r;
}

const char *to_string(Quantity q) {
  switch (q) {
  case Quantity::s:
    return "s";
  case Quantity::phi:
    return "phi";
  case Quantity::Theta:
    return "Theta";
  case Quantity::H:
    return "H";
  case Quantity::kappa:
    return "kappa";
  }
  return "?";
}

std::vector<double> quantity_values(const geom::GraphState &s, const geom::GeometrySample &g,
                                    Quantity which, double C0) {
  const warp::WarpProfile &p = s.setup->profile;
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    switch (which) {
    case Quantity::s:
      f[i] = s.u[i];
      break;
    case Quantity::phi:
      f[i] = warp::primitive_phi(p, s.u[i]);
      break;
    case Quantity::Theta:
      f[i] = g.Theta[i];
      break;
    case Quantity::H:
      f[i] = g.H[i];
      break;
    case Quantity::kappa:
      f[i] = warp::kappa(p, s.u[i], C0);
      break;
    }
  }
  return f;
}

namespace {

inline double mirror(const std::vector<double> &u, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  if (i < 0) {
    return u[static_cast<std::size_t>(-i)];
  }
  if (i >= n) {
    return u[static_cast<std::size_t>(2 * (n - 1) - i)];
  }
  return u[static_cast<std::size_t>(i)];
}

struct Window {
  const geom::GraphState &prev, &mid, &next;
  geom::GeometrySample gm;
  double c0, c1, c2; // three-point weights for d/dt at mid
  std::vector<double> ut;
  // Face data of mid: J/W^2 at every face.
  std::vector<double> face_w;
  std::vector<double> J; // nodes

  Window(const geom::GraphState &a, const geom::GraphState &b, const geom::GraphState &c)
      : prev(a), mid(b), next(c), gm(geom::sample(b)) {
    const double d1 = b.t - a.t, d2 = c.t - b.t;
    if (!(d1 > 0.0) || !(d2 > 0.0)) {
      throw Error("residual window needs strictly increasing times");
    }
    c0 = -d2 / (d1 * (d1 + d2));
    c1 = (d2 - d1) / (d1 * d2);
    c2 = d1 / (d2 * (d1 + d2));
    const geom::Setup &st = *b.setup;
    const std::size_t N = b.size();
    const int n = st.n();
    ut.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      ut[i] = c0 * a.u[i] + c1 * b.u[i] + c2 * c.u[i];
    }
    std::vector<double> uf, pf;
    geom::face_values(b.u, st.h(), uf, pf);
    face_w.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
      const double rho = st.profile.rho(uf[k]);
      const double W2 = rho * rho - pf[k] * pf[k];
      face_w[k] = std::sqrt(W2) * std::pow(rho, n - 1) * st.measure_face[k] / W2;
    }
    J.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      J[i] = gm.W[i] * std::pow(gm.rho[i], n - 1) * st.measure_node[i];
    }
  }

  std::size_t first() const { return 2; }
  std::size_t last() const { return mid.size() - 3; }

  /// (d/dt along the normal) f - Laplacian f at interior node i.
  double Q(const std::vector<double> &f0, const std::vector<double> &f1,
           const std::vector<double> &f2, std::size_t i) const {
    const double h = mid.setup->h();
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double fx_r = (mirror(f1, ii + 1) - f1[i]) / h;
    const double fx_l = (f1[i] - mirror(f1, ii - 1)) / h;
    const double lap = (face_w[i + 1] * fx_r - face_w[i] * fx_l) / (h * J[i]);
    const double ft = c0 * f0[i] + c1 * f1[i] + c2 * f2[i];
    const double fx = 0.5 * (fx_r + fx_l);
    const double W2 = gm.W[i] * gm.W[i];
    return ft + ut[i] * gm.p[i] * fx / W2 - lap;
  }
};

double rhs_of(Quantity which, const geom::GeometrySample &g, std::size_t i, int n, double C0) {
  const double rho = g.rho[i], r1 = g.rho_p[i], r2 = g.rho_pp[i];
  switch (which) {
  case Quantity::s:
    return r1 / rho * (n + g.grad_s2[i]);
  case Quantity::phi:
    return n * r1;
  case Quantity::Theta:
    return 2.0 * r1 * g.H[i] - g.Theta[i] * (g.ric_nu[i] + g.A2[i] + n * r2 / rho);
  case Quantity::H:
    return -(g.A2[i] + g.ric_nu[i]) * g.H[i];
  case Quantity::kappa:
    return C0 * n + C0 * (rho / r1) * (r2 / r1) * g.grad_s2[i];
  }
  return 0.0;
}

} // namespace

ResidualNorms residual_Q(const geom::GraphState &prev, const geom::GraphState &mid,
                         const geom::GraphState &next, Quantity which, double C0,
                         std::vector<double> *per_node) {
  if (mid.size() < 6) {
    throw Error("residual_Q needs at least 6 nodes");
  }
  const Window w(prev, mid, next);
  const auto g0 = geom::sample(prev);
  const auto g2 = geom::sample(next);
  const auto f0 = quantity_values(prev, g0, which, C0);
  const auto f1 = quantity_values(mid, w.gm, which, C0);
  const auto f2 = quantity_values(next, g2, which, C0);
  const int n = mid.setup->n();
  const double h = mid.setup->h();
  ResidualNorms r;
  r.t = mid.t;
  double ss = 0.0;
  if (per_node) {
    per_node->assign(mid.size(), kNaN);
  }
  for (std::size_t i = w.first(); i <= w.last(); ++i) {
    const double res = w.Q(f0, f1, f2, i) - rhs_of(which, w.gm, i, n, C0);
    if (per_node) {
      (*per_node)[i] = res;
    }
    r.sup = std::max(r.sup, std::abs(res));
    ss += res * res * h;
  }
  r.l2 = std::sqrt(ss);
  return r;
}

std::vector<ResidualNorms> residual_Q(const std::vector<geom::GraphState> &history,
                                      Quantity which, double C0) {
  if (history.size() < 3) {
    throw Error("residual_Q needs at least three stored states");
  }
  std::vector<ResidualNorms> out;
  for (std::size_t k = 1; k + 1 < history.size(); ++k) {
    out.push_back(residual_Q(history[k - 1], history[k], history[k + 1], which, C0));
  }
  return out;
}

BoundaryDefects boundary_identities(const geom::GraphState &s, const geom::GeometrySample &g,
                                    double C0) {
  const geom::Setup &st = *s.setup;
  const std::size_t N = s.size();
  const double h = st.h();
  std::vector<double> rho = g.rho;
  std::vector<double> kap(N, kNaN);
  bool have_kappa = true;
  try {
    kap = quantity_values(s, g, Quantity::kappa, C0);
  } catch (const DomainError &) {
    have_kappa = false;
  }
  auto outward = [&](const std::vector<double> &f, bool right) {
    // 3 f0 - 4 f1 + f2, grouped so that constant data gives exactly zero
    if (right) {
      return (3.0 * (f[N - 1] - f[N - 2]) + (f[N - 3] - f[N - 2])) / (2.0 * h) / g.W[N - 1];
    }
    return (3.0 * (f[0] - f[1]) + (f[2] - f[1])) / (2.0 * h) / g.W[0];
  };
  BoundaryDefects d;
  d.kappa = have_kappa ? 0.0 : kNaN;
  for (bool right : {false, true}) {
    if (!right && st.radial()) {
      continue; // r = 0 is not a boundary
    }
    d.rho = std::max(d.rho, std::abs(outward(rho, right)));
    d.Theta = std::max(d.Theta, std::abs(outward(g.Theta, right)));
    d.H = std::max(d.H, std::abs(outward(g.H, right)));
    if (have_kappa) {
      d.kappa = std::max(d.kappa, std::abs(outward(kap, right)));
    }
    const std::size_t b = right ? N - 1 : 0;
    const auto bb = static_cast<std::ptrdiff_t>(b);
    const double ds = (mirror(s.u, bb + 1) - mirror(s.u, bb - 1)) / (2.0 * h) / g.W[b];
    d.s = std::max(d.s, std::abs(ds));
  }
  return d;
}

SimonsSample simons_residual(const geom::GraphState &prev, const geom::GraphState &mid,
                             const geom::GraphState &next) {
  const geom::Setup &st = *mid.setup;
  if (st.profile.kind() != warp::Kind::minkowski_product || st.n() != 1) {
    throw Error("Simons residual needs the flat ambient (minkowski_product, n = 1)");
  }
  const Window w(prev, mid, next);
  const auto A0 = geom::sample(prev).A2;
  const auto &A1 = w.gm.A2;
  const auto A2n = geom::sample(next).A2;
  const double h = st.h();
  SimonsSample out;
  out.t = mid.t;
  for (std::size_t i = w.first(); i <= w.last(); ++i) {
    const double kx = (w.gm.H[i + 1] - w.gm.H[i - 1]) / (2.0 * h);
    const double gradA2 = kx * kx / (w.gm.W[i] * w.gm.W[i]);
    const double direct = 0.5 * w.Q(A0, A1, A2n, i) + gradA2;
    const double a4 = A1[i] * A1[i];
    out.residual_sup = std::max(out.residual_sup, std::abs(direct + a4));
    out.plus_sign_defect_sup = std::max(out.plus_sign_defect_sup, std::abs(direct - a4));
  }
  return out;
}

std::vector<SimonsSample> simons_residual(const std::vector<geom::GraphState> &history) {
  if (history.size() < 3) {
    throw Error("simons_residual needs at least three stored states");
  }
  std::vector<SimonsSample> out;
  for (std::size_t k = 1; k + 1 < history.size(); ++k) {
    out.push_back(simons_residual(history[k - 1], history[k], history[k + 1]));
  }
  return out;
}

CutoffSample cutoff_monitor(const geom::GraphState &s, const geom::GeometrySample &g, double C_R) {
  const geom::Setup &st = *s.setup;
  if (!st.radial()) {
    throw Error("cutoff monitor needs a ball domain");
  }
  const double R = st.leaf.domain().b;
  const std::size_t N = s.size();
  std::vector<double> f(N);
  CutoffSample c;
  for (std::size_t i = 0; i < N; ++i) {
    f[i] = st.leaf.cutoff(R, C_R, st.x(i)).xi * g.A2[i];
    c.sup_xi_A2 = std::max(c.sup_xi_A2, f[i]);
  }
  c.boundary_derivative =
      (3.0 * f[N - 1] - 4.0 * f[N - 2] + f[N - 3]) / (2.0 * st.h()) / g.W[N - 1];
  return c;
}

double conformal_defect(const geom::GeometrySample &g) {
  double d = 0.0;
  for (std::size_t i = 0; i < g.p.size(); ++i) {
    d = std::max(d, std::abs(g.p[i]) / g.rho[i]);
  }
  return d;
}

AsymptoticsReport asymptotics_report(const std::vector<flow::TraceRecord> &records,
                                     const std::vector<double> &defect, double eps_slack) {
  AsymptoticsReport a;
  if (records.empty()) {
    return a;
  }
  a.osc_min_margin = kInf;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double prev = records[k - 1].osc;
    a.osc_min_margin = std::min(a.osc_min_margin, (prev - records[k].osc) / scale(prev));
  }
  if (records.size() < 2) {
    a.osc_min_margin = 0.0;
  }
  a.osc_nonincreasing = a.osc_min_margin >= -eps_slack;
  a.osc_ratio = records.front().osc > 0.0 ? records.back().osc / records.front().osc : 1.0;
  if (!defect.empty()) {
    a.defect_start = defect.front();
    a.defect_end = defect.back();
    a.defect_decreased = a.defect_end < a.defect_start;
  }
  return a;
}

Monitor::Monitor(const geom::GraphState &initial, double T, MonitorOptions opts)
    : opts_(std::move(opts)), k_(theorem_constants(initial, T, opts_.eps_slack)) {
  ledger_.slack = opts_.eps_slack;
  const geom::Setup &st = *initial.setup;
  const warp::WarpProfile &p = st.profile;
  const double lo = k_.min_u0 - opts_.companion_gap;
  const double hi = k_.max_u0 + opts_.companion_gap;
  const bool companions = opts_.companion_gap > 0.0 && p.contains(lo) && p.contains(hi);
  if (companions) {
    lower_.emplace(p, st.n(), lo);
    upper_.emplace(p, st.n(), hi);
  }
  if (st.radial()) {
    const double R = st.leaf.domain().b;
    C_R_ = opts_.cutoff_C_R.value_or(2.0 * st.leaf.jacobi(R).chi);
  }
  const double d0 = conformal_defect(geom::sample(initial));
  for (const auto &id : check_ids()) {
    if (!on(id)) {
      continue;
    }
    const Rule r = rule_for(id, k_, companions, st.radial(), d0);
    ledger_.declare(id, r.kind, r.applicable, r.note);
    col_[id] = columns_.size();
    columns_.push_back(id);
  }
}

bool Monitor::on(const std::string &id) const {
  return opts_.enabled.empty() || opts_.enabled.count(id) != 0;
}

void Monitor::put(std::vector<double> &row, const std::string &id, double t, double margin) {
  auto it = col_.find(id);
  if (it == col_.end() || ledger_.status(id) == Status::not_applicable) {
    return;
  }
  row[it->second] = margin;
  ledger_.record(id, t, margin);
}

void Monitor::observe(const geom::GraphState &s, const geom::GeometrySample &g) {
  const double t = s.t;
  std::vector<double> row(columns_.size(), kNaN);
  std::optional<Companions> comp;
  if (lower_ && upper_) {
    try {
      comp = Companions{lower_->advance_to(t), upper_->advance_to(t)};
    } catch (const Error &) {
      // a companion slice left I; avoidance is only checked while both exist
      lower_.reset();
      upper_.reset();
    }
  }
  for (const auto &[id, m] : evaluate_bounds(s, g, k_, comp)) {
    put(row, id, t, m);
  }
  const flow::TraceRecord rec = flow::summarize(s, g);
  if (comp) {
    const double so = comp->upper - comp->lower;
    if (!records_.empty()) {
      put(row, "slice_osc", t, (prev_slice_osc_ - so) / scale(prev_slice_osc_));
    }
    prev_slice_osc_ = so;
  }
  if (!records_.empty()) {
    const double prev = records_.back().osc;
    put(row, "osc_monotone", t, (prev - rec.osc) / scale(prev));
  }
  double h2 = 0.0;
  for (double H : g.H) {
    h2 = std::max(h2, H * H);
  }
  max_H2_.push_back(h2);
  const double d = conformal_defect(g);
  defect_.push_back(d);
  put(row, "conformal_defect", t, d);

  const BoundaryDefects bd = boundary_identities(s, g, opts_.C0);
  double worst = std::max({bd.rho, bd.Theta, bd.H, bd.s});
  if (!std::isnan(bd.kappa)) {
    worst = std::max(worst, bd.kappa);
  }
  put(row, "boundary_defect", t, worst);
  if (opts_.residuals) {
    boundary_.push_back(bd);
  }
  if (C_R_) {
    const CutoffSample c = cutoff_monitor(s, g, *C_R_);
    put(row, "cutoff_A2", t, c.sup_xi_A2);
    put(row, "cutoff_boundary", t, c.boundary_derivative);
  }

  if (opts_.residuals || opts_.simons) {
    window_.push_back(s);
    if (window_.size() > 3) {
      window_.erase(window_.begin());
    }
    if (window_.size() == 3) {
      const auto &[a, b, c] = std::tie(window_[0], window_[1], window_[2]);
      if (opts_.residuals) {
        for (Quantity q : {Quantity::s, Quantity::phi, Quantity::Theta, Quantity::H,
                           Quantity::kappa}) {
          try {
            const ResidualNorms r = residual_Q(a, b, c, q, opts_.C0);
            residuals_[q].push_back(r);
          } catch (const DomainError &) {
            // kappa needs rho' > 0 along the path
          }
        }
      }
      if (opts_.simons) {
        simons_.push_back(simons_residual(a, b, c));
      }
    }
  }
  records_.push_back(rec);
  rows_.push_back(std::move(row));
  times_.push_back(t);
}

void Monitor::finish() {
  if (col_.count("H_schedule") && ledger_.status("H_schedule") != Status::not_applicable &&
      !times_.empty()) {
    const double rate = 2.0 * k_.n * k_.C_minus_eff * k_.C_minus_eff;
    const ComparisonResult r = ode_comparison(
        times_, max_H2_, [rate](double gamma) { return rate * gamma; }, max_H2_.front(),
        opts_.eps_slack);
    const std::size_t c = col_.at("H_schedule");
    for (std::size_t i = 0; i < r.margin.size(); ++i) {
      rows_[i][c] = r.margin[i];
      ledger_.record("H_schedule", times_[i], r.margin[i]);
    }
    if (r.expired) {
      std::ostringstream os;
      os << "comparison expired at t*=" << r.t_expired;
      ledger_.set_failed("H_schedule", os.str());
    } else if (!r.pass) {
      ledger_.set_failed("H_schedule", "H^2 exceeds the comparison solution");
    }
  }
  asym_ = asymptotics_report(records_, defect_, opts_.eps_slack);
  if (col_.count("defect_decay") && ledger_.status("defect_decay") != Status::not_applicable &&
      !defect_.empty()) {
    const double d0 = defect_.front(), d1 = defect_.back();
    const double m = (d0 - d1) / scale(d0);
    rows_.back()[col_.at("defect_decay")] = m;
    ledger_.record("defect_decay", times_.back(), m);
  }
}

} // namespace grwflow::verify
