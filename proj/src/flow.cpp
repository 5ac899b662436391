#include "grwflow/flow.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace grwflow::flow {

namespace {

inline double mirror(std::span<const double> u, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  if (i < 0) {
    return u[static_cast<std::size_t>(-i)];
  }
  if (i >= n) {
    return u[static_cast<std::size_t>(2 * (n - 1) - i)];
  }
  return u[static_cast<std::size_t>(i)];
}

} // namespace

double InitialData::value(double x, const leaf::Domain &d) const {
  if (kind == Kind::constant) {
    return c;
  }
  return c + amplitude * std::cos(M_PI * mode * (x - d.a) / d.length());
}

double InitialData::slope(double x, const leaf::Domain &d) const {
  if (kind == Kind::constant) {
    return 0.0;
  }
  const double k = M_PI * mode / d.length();
  return -amplitude * k * std::sin(k * (x - d.a));
}

std::shared_ptr<const geom::Setup> make_setup(const FlowConfig &cfg) {
  warp::WarpProfile profile = cfg.profile == "table"
                                  ? warp::WarpProfile::load_table(cfg.profile_table)
                                  : warp::WarpProfile::catalog(cfg.profile);
  if (cfg.s_base) {
    if (!profile.contains(*cfg.s_base)) {
      throw ConfigError("s_base outside the interval of profile " + profile.name());
    }
    profile = profile.with_base(*cfg.s_base);
  } else if (profile.contains(cfg.initial.c)) {
    // otherwise initial_state reports the offending node
    profile = profile.with_base(cfg.initial.c);
  }
  leaf::LeafGeometry leaf(cfg.n, cfg.K_M, cfg.domain);
  return std::make_shared<const geom::Setup>(std::move(profile), std::move(leaf), cfg.grid);
}

geom::GraphState initial_state(const FlowConfig &cfg, std::shared_ptr<const geom::Setup> setup) {
  geom::GraphState s;
  s.setup = setup;
  s.t = 0.0;
  s.u.resize(setup->points);
  const auto &dom = setup->leaf.domain();
  for (std::size_t i = 0; i < setup->points; ++i) {
    const double x = setup->x(i);
    const double u = cfg.initial.value(x, dom);
    std::ostringstream os;
    if (!setup->profile.contains(u)) {
      os << "initial data leaves I at node " << i << " (x=" << x << ", u=" << u << ")";
      throw ConfigError(os.str());
    }
    const double rho = setup->profile.rho(u);
    const double slope = std::abs(cfg.initial.slope(x, dom));
    if (slope > (1.0 - 1e-3) * rho) {
      os << "initial data not spacelike with margin 1e-3 rho at node " << i << " (x=" << x
         << "): |Du0|=" << slope << ", rho(u0)=" << rho;
      throw ConfigError(os.str());
    }
    s.u[i] = u;
  }
  return s;
}

void rhs_u(const geom::GraphState &s, std::vector<double> &out) {
  const geom::Setup &st = *s.setup;
  const std::size_t N = s.size();
  const double h = st.h();
  const int n = st.n();
  std::vector<double> q(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    const double ul = mirror(s.u, kk - 1), ur = mirror(s.u, kk);
    const double pf = (ur - ul) / h;
    const double rho = st.profile.rho(0.5 * (ul + ur));
    const double w2 = rho * rho - pf * pf;
    if (!(w2 > 0.0)) {
      const std::size_t node = std::min(k, N - 1);
      throw NotSpacelike(node, st.x(node), std::abs(pf), rho);
    }
    q[k] = pf / (rho * std::sqrt(w2));
  }
  out.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const geom::Derivs d = geom::derivatives(s.u, i, h);
    const warp::Jet j = st.profile.jet(s.u[i]);
    const double W = geom::tilt_from(j.rho, d.p, i, st.x(i)).W;
    const double H = geom::flux_divergence(st, q, i) + j.d1 * d.p * d.p / (j.rho * j.rho * W) +
                     n * j.d1 / W;
    out[i] = W / j.rho * H;
  }
}

void rhs_z(const geom::GraphState &z, std::vector<double> &out) {
  const geom::Setup &st = *z.setup;
  const std::size_t N = z.size();
  const double h = st.h();
  const int n = st.n();
  std::vector<double> q(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    const double pf = (mirror(z.u, kk) - mirror(z.u, kk - 1)) / h;
    const double w2 = 1.0 - pf * pf;
    if (!(w2 > 0.0)) {
      const std::size_t node = std::min(k, N - 1);
      throw NotSpacelike(node, st.x(node), std::abs(pf), 1.0);
    }
    q[k] = pf / std::sqrt(w2);
  }
  out.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const geom::Derivs d = geom::derivatives(z.u, i, h);
    const double w2 = 1.0 - d.p * d.p;
    if (!(w2 > 0.0)) {
      throw NotSpacelike(i, st.x(i), std::abs(d.p), 1.0);
    }
    const double Wc = std::sqrt(w2);
    const warp::Jet j = st.profile.jet(warp::conformal_parameter_inverse(st.profile, z.u[i]));
    out[i] = (Wc / j.rho * geom::flux_divergence(st, q, i) + n * j.d1 / j.rho) / j.rho;
  }
}

double diffusion_coefficient(const geom::GraphState &s, std::size_t i) {
  const geom::Setup &st = *s.setup;
  const geom::Tilt tl = geom::tilt(s, i);
  const double c = 1.0 / (tl.W * tl.W);
  return (st.radial() && i == 0) ? st.n() * c : c;
}

double cfl_dt(const geom::GraphState &s, double cfl_safety, double dt_max) {
  double dmax = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dmax = std::max(dmax, diffusion_coefficient(s, i));
  }
  const double h = s.setup->h();
  return std::min(dt_max, cfl_safety * h * h / (2.0 * dmax));
}

namespace {

using Rhs = void (*)(const geom::GraphState &, std::vector<double> &);

geom::GraphState heun(const geom::GraphState &s, double dt, Rhs f) {
  std::vector<double> k1, k2;
  f(s, k1);
  geom::GraphState mid = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    mid.u[i] = s.u[i] + dt * k1[i];
  }
  mid.t = s.t + dt;
  f(mid, k2);
  geom::GraphState next = s;
  next.t = s.t + dt;
  for (std::size_t i = 0; i < s.size(); ++i) {
    next.u[i] = s.u[i] + 0.5 * dt * (k1[i] + k2[i]);
  }
  return next;
}

// Backward Euler on the frozen principal part D u_xx, forward Euler on the
// remainder. coeff[i] is D at node i (origin factor n included).
geom::GraphState imex(const geom::GraphState &s, double dt, Rhs f,
                      const std::vector<double> &coeff) {
  const std::size_t N = s.size();
  const double h2 = s.setup->h() * s.setup->h();
  std::vector<double> fu;
  f(s, fu);
  std::vector<double> lo(N, 0.0), di(N, 0.0), up(N, 0.0), rhs(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double c = coeff[i] / h2;
    double cl = c, cu = c;
    if (i == 0) {
      cl = 0.0;
      cu = 2.0 * c;
    } else if (i == N - 1) {
      cu = 0.0;
      cl = 2.0 * c;
    }
    const double ul = i > 0 ? s.u[i - 1] : 0.0;
    const double ur = i + 1 < N ? s.u[i + 1] : 0.0;
    const double Lu = cl * ul + cu * ur - 2.0 * c * s.u[i];
    lo[i] = -dt * cl;
    up[i] = -dt * cu;
    di[i] = 1.0 + 2.0 * dt * c;
    rhs[i] = s.u[i] + dt * (fu[i] - Lu);
  }
  for (std::size_t i = 1; i < N; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  geom::GraphState next = s;
  next.t = s.t + dt;
  next.u[N - 1] = rhs[N - 1] / di[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) {
    next.u[i] = (rhs[i] - up[i] * next.u[i + 1]) / di[i];
  }
  return next;
}

std::vector<double> coefficients(const geom::GraphState &u) {
  std::vector<double> c(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    c[i] = diffusion_coefficient(u, i);
  }
  return c;
}

} // namespace

geom::GraphState step_u(const geom::GraphState &s, double dt, Scheme scheme) {
  if (scheme == Scheme::imex) {
    return imex(s, dt, rhs_u, coefficients(s));
  }
  return heun(s, dt, rhs_u);
}

geom::GraphState step_z(const geom::GraphState &z, double dt, Scheme scheme) {
  if (scheme == Scheme::imex) {
    return imex(z, dt, rhs_z, coefficients(reconstruct_height(z)));
  }
  return heun(z, dt, rhs_z);
}

geom::GraphState reconstruct_height(const geom::GraphState &z) {
  geom::GraphState u = z;
  for (double &v : u.u) {
    v = warp::conformal_parameter_inverse(z.setup->profile, v);
  }
  return u;
}

geom::GraphState to_conformal(const geom::GraphState &u) {
  geom::GraphState z = u;
  for (double &v : z.u) {
    v = warp::conformal_parameter(u.setup->profile, v);
  }
  return z;
}

TraceRecord summarize(const geom::GraphState &s, const geom::GeometrySample &g) {
  const auto [umin, umax] = std::minmax_element(s.u.begin(), s.u.end());
  const auto [hmin, hmax] = std::minmax_element(g.H.begin(), g.H.end());
  return {s.t,
          *umin,
          *umax,
          *umax - *umin,
          *std::max_element(g.theta.begin(), g.theta.end()),
          *hmin,
          *hmax,
          *std::max_element(g.A2.begin(), g.A2.end())};
}

namespace {

double next_dt(const geom::GraphState &u, const FlowConfig &cfg) {
  double dt = cfl_dt(u, cfg.cfl_safety, cfg.dt_max);
  if (cfg.scheme == Scheme::imex) {
    dt = std::min(cfg.dt_max, dt * cfg.imex_factor);
  }
  const double remaining = cfg.t_end - u.t;
  // Avoid a sliver step at the end.
  if (dt >= remaining || remaining - dt < 1e-3 * dt) {
    dt = remaining;
  }
  return dt;
}

bool finished(double t, double t_end) { return t >= t_end - 1e-14 * std::max(1.0, t_end); }

} // namespace

FlowTrace run_u(const FlowConfig &cfg, const Observer &observe) {
  auto setup = make_setup(cfg);
  geom::GraphState state = initial_state(cfg, setup);
  FlowTrace trace;
  geom::GeometrySample g;
  try {
    g = geom::sample(state);
  } catch (const NotSpacelike &e) {
    throw ConfigError(std::string("initial data: ") + e.what());
  }
  trace.records.push_back(summarize(state, g));
  if (observe) {
    observe(state, g);
  }
  while (!finished(state.t, cfg.t_end)) {
    geom::GraphState next;
    try {
      const double dt = next_dt(state, cfg);
      next = step_u(state, dt, cfg.scheme);
      if (finished(next.t, cfg.t_end)) {
        next.t = cfg.t_end;
      }
      g = geom::sample(next);
    } catch (const Error &e) {
      std::ostringstream os;
      os << "flow broke down after t=" << state.t << ": " << e.what();
      throw FlowBreakdown(os.str(), state);
    }
    state = std::move(next);
    trace.records.push_back(summarize(state, g));
    if (observe) {
      observe(state, g);
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

FlowTrace run_z(const FlowConfig &cfg, const Observer &observe) {
  auto setup = make_setup(cfg);
  geom::GraphState z = to_conformal(initial_state(cfg, setup));
  FlowTrace trace;
  auto emit = [&](const geom::GraphState &zs) {
    const geom::GraphState u = reconstruct_height(zs);
    const geom::GeometrySample g = geom::sample(u);
    trace.records.push_back(summarize(u, g));
    if (observe) {
      observe(zs, g);
    }
  };
  emit(z);
  while (!finished(z.t, cfg.t_end)) {
    geom::GraphState next;
    try {
      const double dt = next_dt(reconstruct_height(z), cfg);
      next = step_z(z, dt, cfg.scheme);
      if (finished(next.t, cfg.t_end)) {
        next.t = cfg.t_end;
      }
      emit(next);
    } catch (const FlowBreakdown &) {
      throw;
    } catch (const Error &e) {
      std::ostringstream os;
      os << "conformal flow broke down after t=" << z.t << ": " << e.what();
      throw FlowBreakdown(os.str(), reconstruct_height(z));
    }
    z = std::move(next);
  }
  trace.final_state = z;
  return trace;
}

std::vector<GaugeSample> run_gauge(const FlowConfig &cfg) {
  auto setup = make_setup(cfg);
  geom::GraphState u = initial_state(cfg, setup);
  geom::GraphState z = to_conformal(u);
  std::vector<GaugeSample> out;
  auto record = [&] {
    double sup = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      sup = std::max(sup, std::abs(warp::conformal_parameter(setup->profile, u.u[i]) - z.u[i]));
    }
    out.push_back({u.t, sup});
  };
  record();
  while (!finished(u.t, cfg.t_end)) {
    const double dt = next_dt(u, cfg);
    try {
      u = step_u(u, dt, cfg.scheme);
      z = step_z(z, dt, cfg.scheme);
    } catch (const Error &e) {
      throw FlowBreakdown(std::string("gauge run broke down: ") + e.what(), u);
    }
    if (finished(u.t, cfg.t_end)) {
      u.t = z.t = cfg.t_end;
    }
    record();
  }
  return out;
}

namespace {

using SliceState = std::array<double, 1>;

double integrate_slice(const warp::WarpProfile &p, int n, double s0, double t0, double t1) {
  namespace odeint = boost::numeric::odeint;
  if (t1 == t0) {
    return s0;
  }
  SliceState x{s0};
  auto rhs = [&](const SliceState &s, SliceState &dsdt, double) {
    const warp::Jet j = p.jet(s[0]);
    dsdt[0] = n * j.d1 / j.rho;
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<SliceState>>(1e-13, 1e-13);
  odeint::integrate_adaptive(stepper, rhs, x, t0, t1, 1e-3 * (t1 - t0));
  return x[0];
}

} // namespace

double slice_flow(const warp::WarpProfile &p, int n, double s_init, double t) {
  if (t < 0.0) {
    throw DomainError("slice_flow needs t >= 0");
  }
  return integrate_slice(p, n, s_init, 0.0, t);
}

double slice_time_of_flight(const warp::WarpProfile &p, int n, double s_init, double s_target) {
  return warp::kappa(p.with_base(s_init), s_target, 1.0) / n;
}

SliceCompanion::SliceCompanion(warp::WarpProfile p, int n, double s0)
    : profile_(std::move(p)), n_(n), s_(s0) {}

double SliceCompanion::advance_to(double t) {
  s_ = integrate_slice(profile_, n_, s_, t_, t);
  t_ = t;
  return s_;
}

} // namespace grwflow::flow
