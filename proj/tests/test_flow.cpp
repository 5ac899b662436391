#include "doctest.h"

#include "grwflow/flow.hpp"
#include "grwflow/warp.hpp"

#include <algorithm>
#include <cmath>

using namespace grwflow;
using flow::FlowConfig;

namespace {

FlowConfig constant_config(const std::string &profile, int n, double c, double t_end,
                           std::size_t grid = 41) {
  FlowConfig cfg;
  cfg.profile = profile;
  cfg.n = n;
  cfg.grid = grid;
  cfg.t_end = t_end;
  cfg.initial.kind = flow::InitialData::Kind::constant;
  cfg.initial.c = c;
  return cfg;
}

FlowConfig bump_config(const std::string &profile, int n, leaf::Domain d, double c, double A,
                       double t_end, std::size_t grid) {
  FlowConfig cfg = constant_config(profile, n, c, t_end, grid);
  cfg.domain = d;
  cfg.initial.kind = flow::InitialData::Kind::bump;
  cfg.initial.amplitude = A;
  return cfg;
}

geom::GraphState initial(const FlowConfig &cfg) {
  return flow::initial_state(cfg, flow::make_setup(cfg));
}

double sup_abs_diff(const std::vector<double> &u, double v) {
  double m = 0.0;
  for (double x : u) {
    m = std::max(m, std::abs(x - v));
  }
  return m;
}

} // namespace

TEST_CASE("initial data") {
  flow::InitialData bump{flow::InitialData::Kind::bump, 1.0, 0.2, 2};
  const auto d = leaf::Domain::interval(1.0, 3.0);
  CHECK(bump.value(1.0, d) == doctest::Approx(1.2));
  CHECK(bump.value(2.0, d) == doctest::Approx(0.8));
  CHECK(bump.slope(1.5, d) == doctest::Approx(-0.2 * 3.141592653589793));
  CHECK(bump.slope(3.0, d) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("step_u on slices") {
  auto mk = initial(constant_config("minkowski_product", 2, 0.4, 1.0));
  auto next = flow::step_u(mk, 1e-3);
  CHECK(sup_abs_diff(next.u, 0.4) == 0.0);
  CHECK(next.t == doctest::Approx(1e-3));

  auto ss = initial(constant_config("steady_state", 2, 1.0, 1.0));
  for (auto scheme : {flow::Scheme::explicit_rk2, flow::Scheme::imex}) {
    auto s1 = flow::step_u(ss, 1e-3, scheme);
    CHECK(sup_abs_diff(s1.u, 1.0 + 2e-3) < 1e-12);
  }
}

TEST_CASE("Einstein-de Sitter slices follow sqrt(c^2 + 4t)") {
  for (auto scheme : {flow::Scheme::explicit_rk2, flow::Scheme::imex}) {
    auto cfg = constant_config("einstein_de_sitter", 3, 1.5, 1.0);
    cfg.scheme = scheme;
    double worst = 0.0;
    flow::run_u(cfg, [&](const geom::GraphState &s, const geom::GeometrySample &) {
      worst = std::max(worst, sup_abs_diff(s.u, std::sqrt(2.25 + 4.0 * s.t)));
    });
    // IMEX is first order in time and takes steps ten times the explicit limit
    CHECK(worst < (scheme == flow::Scheme::imex ? 1e-3 : 1e-6));
  }
}

TEST_CASE("run_u") {
  auto tr = flow::run_u(constant_config("steady_state", 2, 1.0, 1.0));
  CHECK(tr.final_state.t == 1.0);
  CHECK(sup_abs_diff(tr.final_state.u, 3.0) < 1e-9);
  CHECK(std::all_of(tr.records.begin(), tr.records.end(),
                    [](const flow::TraceRecord &r) { return r.osc == 0.0; }));

  auto ref = flow::run_u(bump_config("reference", 2, leaf::Domain::ball(1.0), 1.0, 0.2, 0.5, 41));
  CHECK(ref.records.back().osc < ref.records.front().osc);
  CHECK(ref.records.front().t == 0.0);
  for (std::size_t k = 1; k < ref.records.size(); ++k) {
    CHECK(ref.records[k].t > ref.records[k - 1].t);
  }

  auto steep = bump_config("minkowski_product", 1, leaf::Domain::interval(0, 1), 0.0, 0.5, 1.0, 20);
  CHECK_THROWS_AS(flow::run_u(steep), ConfigError);
  auto outside = constant_config("einstein_de_sitter", 2, -1.0, 1.0);
  CHECK_THROWS_AS(flow::run_u(outside), ConfigError);
}

TEST_CASE("breakdown keeps the last accepted state") {
  FlowConfig cfg = constant_config("table", 2, 1.0, 0.5, 20);
  cfg.profile_table = GRWFLOW_SOURCE_DIR "/tests/data/short_exp_table.txt";
  try {
    flow::run_u(cfg);
    FAIL("expected a breakdown");
  } catch (const flow::FlowBreakdown &e) {
    const auto &last = e.last_good();
    CHECK(last.t > 0.1);
    CHECK(last.t < 0.16);
    CHECK(last.u.front() <= 1.3);
  }
}

TEST_CASE("conformal gauge") {
  auto mk = constant_config("minkowski_product", 2, 0.4, 0.5);
  auto z = flow::run_z(mk);
  CHECK(sup_abs_diff(z.final_state.u, z.final_state.u.front()) == 0.0);
  CHECK(flow::step_z(flow::to_conformal(initial(mk)), 1e-3).u ==
        flow::to_conformal(initial(mk)).u);

  // constant data on steady state: z(t) = varsigma(u0 + 2t)
  auto ss = constant_config("steady_state", 2, 1.0, 0.5);
  auto zt = flow::run_z(ss);
  const auto p = flow::make_setup(ss)->profile;
  const double expect = warp::conformal_parameter(p, 2.0);
  CHECK(sup_abs_diff(zt.final_state.u, expect) < 1e-5);
  auto ut = flow::run_u(ss);
  CHECK(std::abs(warp::conformal_parameter(p, ut.final_state.u[3]) - zt.final_state.u[3]) < 1e-4);
  CHECK(sup_abs_diff(flow::reconstruct_height(zt.final_state).u, 2.0) < 1e-4);

  // bump data: the gauge discrepancy shrinks under refinement
  double prev = 0.0;
  for (std::size_t N : {41u, 81u}) {
    auto cfg = bump_config("reference", 1, leaf::Domain::interval(0, 1), 1.0, 0.2, 0.05, N);
    double sup = 0.0;
    for (const auto &g : flow::run_gauge(cfg)) {
      sup = std::max(sup, g.sup_diff);
    }
    if (prev > 0.0) {
      CHECK(sup < prev);
    }
    prev = sup;
  }
}

TEST_CASE("slice flow") {
  const auto ss = warp::WarpProfile::catalog("steady_state");
  CHECK(flow::slice_flow(ss, 2, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-10));
  const auto eds = warp::WarpProfile::catalog("einstein_de_sitter");
  CHECK(flow::slice_flow(eds, 3, 1.0, 2.0) == doctest::Approx(3.0).epsilon(1e-10));
  for (const auto &name : warp::WarpProfile::catalog_names()) {
    if (name == "table") {
      continue;
    }
    CHECK(flow::slice_flow(warp::WarpProfile::catalog(name), 2, 1.7, 0.0) == 1.7);
  }
  CHECK(flow::slice_time_of_flight(eds, 3, 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS(flow::slice_flow(ss, 2, 0.0, -1.0));

  flow::SliceCompanion c(eds, 3, 1.0);
  CHECK(c.advance_to(0.75) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(c.advance_to(2.0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("CFL step") {
  auto c101 = constant_config("minkowski_product", 1, 0.0, 1.0, 101);
  const auto s = initial(c101);
  CHECK(flow::cfl_dt(s, 0.5, 1.0) == doctest::Approx(2.5e-5));
  CHECK(flow::cfl_dt(s, 0.5, 1e-6) == 1e-6);

  auto c201 = constant_config("minkowski_product", 1, 0.0, 1.0, 201);
  CHECK(flow::cfl_dt(initial(c201), 0.5, 1.0) == doctest::Approx(2.5e-5 / 4));

  auto steep = bump_config("minkowski_product", 1, leaf::Domain::interval(0, 1), 0.0, 0.25, 1.0, 101);
  CHECK(flow::cfl_dt(initial(steep), 0.5, 1.0) < flow::cfl_dt(s, 0.5, 1.0));
  // the origin of a ball carries the factor n
  auto ball = constant_config("minkowski_product", 3, 0.0, 1.0, 101);
  ball.domain = leaf::Domain::ball(1.0);
  CHECK(flow::diffusion_coefficient(initial(ball), 0) == doctest::Approx(3.0));
  CHECK(flow::diffusion_coefficient(initial(ball), 5) == doctest::Approx(1.0));
}

TEST_CASE("IMEX tracks the explicit scheme on a bump") {
  auto cfg = bump_config("reference", 2, leaf::Domain::ball(1.0), 1.0, 0.2, 0.2, 41);
  auto ex = flow::run_u(cfg);
  cfg.scheme = flow::Scheme::imex;
  auto gap = [&](double factor) {
    cfg.imex_factor = factor;
    auto im = flow::run_u(cfg);
    CHECK(im.records.size() < ex.records.size());
    double d = 0.0;
    for (std::size_t i = 0; i < ex.final_state.size(); ++i) {
      d = std::max(d, std::abs(ex.final_state.u[i] - im.final_state.u[i]));
    }
    return d;
  };
  const double d10 = gap(10.0), d3 = gap(3.0);
  CHECK(d10 < 5e-3);
  CHECK(d3 < d10);
}
