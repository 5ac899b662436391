#pragma once

// Method-of-lines integration of the graph flow
//   u_t = (W/rho) div(Du/(rho W)) + (rho'/rho)(n + |Du|^2/rho^2),
// its conformal-gauge form in z = varsigma(u), and the slice ODEs.

#include "grwflow/errors.hpp"
#include "grwflow/geom.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace grwflow::flow {

enum class Scheme { explicit_rk2, imex };

struct InitialData {
  enum class Kind { constant, bump };
  Kind kind = Kind::constant;
  double c = 1.0;
  double amplitude = 0.0; // bump only: u0 = c + A cos(pi m (x - a)/L)
  int mode = 1;

  double value(double x, const leaf::Domain &d) const;
  double slope(double x, const leaf::Domain &d) const;
};

struct FlowConfig {
  std::string profile = "steady_state";
  std::string profile_table; // path; used when profile == "table"
  std::optional<double> s_base;
  int n = 1;
  double K_M = 0.0;
  leaf::Domain domain = leaf::Domain::interval(0.0, 1.0);
  std::size_t grid = 200;
  double t_end = 1.0;
  Scheme scheme = Scheme::explicit_rk2;
  double cfl_safety = 0.4;
  double dt_max = 1e-2;
  double imex_factor = 10.0; // IMEX steps may exceed the explicit limit by this factor
  InitialData initial;
};

/// Builds the setup (profile, leaf, grid) a config describes. The base point
/// of the profile defaults to the midpoint of the initial height range.
std::shared_ptr<const geom::Setup> make_setup(const FlowConfig &cfg);

/// u0 sampled on the grid. Throws ConfigError naming the first node where
/// the data leaves I or comes within 1e-3 rho of being null.
geom::GraphState initial_state(const FlowConfig &cfg, std::shared_ptr<const geom::Setup> setup);

/// Raised when a run degenerates; carries the last accepted state.
class FlowBreakdown : public Error {
public:
  FlowBreakdown(const std::string &what, geom::GraphState last)
      : Error(what), last_(std::move(last)) {}
  const geom::GraphState &last_good() const { return last_; }

private:
  geom::GraphState last_;
};

/// Right-hand side of the u-flow at every node.
void rhs_u(const geom::GraphState &s, std::vector<double> &out);
/// Right-hand side of rho z_t = (Wc/rho) div(Dz/Wc) + n rho'/rho, divided by rho.
void rhs_z(const geom::GraphState &z, std::vector<double> &out);

/// Principal-symbol coefficient 1/W^2 (times n at a ball's origin).
double diffusion_coefficient(const geom::GraphState &s, std::size_t i);

double cfl_dt(const geom::GraphState &s, double cfl_safety, double dt_max);

geom::GraphState step_u(const geom::GraphState &s, double dt,
                        Scheme scheme = Scheme::explicit_rk2);
geom::GraphState step_z(const geom::GraphState &z, double dt,
                        Scheme scheme = Scheme::explicit_rk2);

/// One accepted step's summary.
struct TraceRecord {
  double t;
  double min_u;
  double max_u;
  double osc;
  double max_theta;
  double min_H;
  double max_H;
  double max_A2;
};

TraceRecord summarize(const geom::GraphState &s, const geom::GeometrySample &g);

struct FlowTrace {
  std::vector<TraceRecord> records;
  geom::GraphState final_state;
};

/// Called on the initial state and after every accepted step.
using Observer = std::function<void(const geom::GraphState &, const geom::GeometrySample &)>;

FlowTrace run_u(const FlowConfig &cfg, const Observer &observe = {});

/// Conformal-gauge run. The observer sees the z-state and the geometry of
/// the reconstructed height u = varsigma^{-1}(z).
FlowTrace run_z(const FlowConfig &cfg, const Observer &observe = {});

/// Height state u = varsigma^{-1}(z), nodewise.
geom::GraphState reconstruct_height(const geom::GraphState &z);
geom::GraphState to_conformal(const geom::GraphState &u);

struct GaugeSample {
  double t;
  double sup_diff; // sup_x |varsigma(u) - z|
};

/// Runs the u- and z-flows in lockstep (common step sizes) and records the
/// gauge discrepancy after every step.
std::vector<GaugeSample> run_gauge(const FlowConfig &cfg);

/// Height of the slice flow ds/dt = n rho'/rho after time t.
double slice_flow(const warp::WarpProfile &p, int n, double s_init, double t);
/// Time the slice flow needs from s_init to s_target; requires rho' > 0.
double slice_time_of_flight(const warp::WarpProfile &p, int n, double s_init, double s_target);

/// Integrates one slice height forward alongside a run.
class SliceCompanion {
public:
  SliceCompanion(warp::WarpProfile p, int n, double s0);
  double advance_to(double t);
  double value() const { return s_; }

private:
  warp::WarpProfile profile_;
  int n_;
  double t_ = 0.0;
  double s_;
};

} // namespace grwflow::flow
