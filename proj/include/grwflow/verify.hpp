#pragma once

// Runtime checks of the a priori estimates, the evolution equations and the
// long-time behaviour along a computed flow.

#include "grwflow/flow.hpp"
#include "grwflow/geom.hpp"
#include "grwflow/warp.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace grwflow::verify {

struct TheoremConstants {
  warp::HypothesisReport hyp; // over the reachable range [hyp.a, hyp.b]
  double T = 0.0;
  int n = 1;
  double C_minus_eff = 0.0;
  double C_plus_eff = 0.0;
  double lambda_eff = 0.0;
  double C1 = 0.0;
  std::optional<double> E; // n/(2 C1), only when C1 > 0
  std::optional<double> M;
  double script_M = 1.0;
  double beta = 0.0;
  double eps_slack = 1e-6;

  // Initial-surface data the bounds are built from.
  double min_u0 = 0.0, max_u0 = 0.0;
  double min_rho0 = 0.0, max_rho0 = 0.0;
  double max_abs_H0 = 0.0, min_H0 = 0.0;
  double max_theta0 = 1.0;
  double min_v0_sq = 0.0; // min (H/Theta)^2

  bool ncc = false;
  bool monotone() const { return hyp.monotone(); }
};

TheoremConstants theorem_constants(const geom::GraphState &initial, double T,
                                   double eps_slack = 1e-6);

enum class Status { pass, fail, not_applicable, diagnostic };
const char *to_string(Status s);

/// Signed, normalized margins per check; a pass/fail check passes iff its
/// minimum margin is >= -slack (strict checks: > 0).
class BoundLedger {
public:
  enum class Kind { bound, strict, diagnostic };

  void declare(const std::string &id, Kind kind, bool applicable, std::string note = {});
  void record(const std::string &id, double t, double margin);
  /// Overrides the verdict (used for checks decided at the end of a run).
  void set_failed(const std::string &id, std::string note);

  bool has(const std::string &id) const { return index_.count(id) != 0; }
  Status status(const std::string &id) const;
  double min_margin(const std::string &id) const;
  double t_of_min_margin(const std::string &id) const;
  const std::string &note(const std::string &id) const;
  const std::vector<std::string> &ids() const { return order_; }
  bool all_pass() const;

  double slack = 1e-6;

private:
  struct Entry {
    Kind kind;
    bool applicable;
    bool failed = false;
    std::string note;
    double min_margin;
    double t_min = 0.0;
    std::size_t samples = 0;
  };
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> order_;
  std::vector<Entry> entries_;
};

/// One ledger row: margins of every applicable bound at one state.
struct Companions {
  double lower; // slice started below min u0
  double upper; // slice started above max u0
};

std::vector<std::pair<std::string, double>>
evaluate_bounds(const geom::GraphState &state, const geom::GeometrySample &g,
                const TheoremConstants &k, const std::optional<Companions> &companions = {});

struct ComparisonResult {
  bool expired = false;
  double t_expired = 0.0;
  bool pass = true;
  std::vector<double> gamma;  // at the series timestamps (up to expiry)
  std::vector<double> margin; // (gamma - f)/max(1, |gamma|)
  double min_margin = 0.0;
  double t_of_min_margin = 0.0;
};

/// Integrates gamma' = F(gamma), gamma(0) = gamma0 with RK4 through the
/// timestamps of (t, f) and asserts f <= gamma (1 + eps_slack).
ComparisonResult ode_comparison(const std::vector<double> &t, const std::vector<double> &f,
                                const std::function<double(double)> &F, double gamma0,
                                double eps_slack = 1e-6);

enum class Quantity { s, phi, Theta, H, kappa };
const char *to_string(Quantity q);

struct ResidualNorms {
  double t = 0.0;
  double sup = 0.0;
  double l2 = 0.0;
};

/// Residual of (d/dt - Laplacian) f - RHS at the middle of three consecutive
/// states, over nodes at least two cells from the boundary. The time
/// derivative follows the normal motion, so the fixed-node derivative gets
/// the tangential correction u_t u_x f_x / W^2.
ResidualNorms residual_Q(const geom::GraphState &prev, const geom::GraphState &mid,
                         const geom::GraphState &next, Quantity which, double C0 = 1.0,
                         std::vector<double> *per_node = nullptr);
std::vector<ResidualNorms> residual_Q(const std::vector<geom::GraphState> &history,
                                      Quantity which, double C0 = 1.0);

/// Per-node values of f on one state.
std::vector<double> quantity_values(const geom::GraphState &s, const geom::GeometrySample &g,
                                    Quantity which, double C0 = 1.0);

/// |<grad f, mu>| at the boundary nodes, from one-sided second-order
/// differences; `s` uses the ghost-node central difference.
struct BoundaryDefects {
  double rho = 0.0;
  double Theta = 0.0;
  double H = 0.0;
  double kappa = 0.0; // NaN where kappa is undefined (rho' <= 0)
  double s = 0.0;
};
BoundaryDefects boundary_identities(const geom::GraphState &s, const geom::GeometrySample &g,
                                    double C0 = 1.0);

/// Flat-ambient check (rho = 1, n = 1) at the middle of three states.
struct SimonsSample {
  double t = 0.0;
  double residual_sup = 0.0; // (1/2)Q|A|^2 + |grad A|^2 + |A|^4
  double plus_sign_defect_sup = 0.0; // (1/2)Q|A|^2 + |grad A|^2 - |A|^4
};
SimonsSample simons_residual(const geom::GraphState &prev, const geom::GraphState &mid,
                             const geom::GraphState &next);
std::vector<SimonsSample> simons_residual(const std::vector<geom::GraphState> &history);

/// Cutoff-weighted curvature on a ball: sup xi |A|^2 and the outward
/// derivative of xi |A|^2 at r = R, with xi = (C_R - chi(r))^3.
struct CutoffSample {
  double sup_xi_A2 = 0.0;
  double boundary_derivative = 0.0;
};
CutoffSample cutoff_monitor(const geom::GraphState &s, const geom::GeometrySample &g,
                            double C_R);

struct AsymptoticsReport {
  bool osc_nonincreasing = true;
  double osc_min_margin = 0.0; // min over steps of (osc_prev - osc)/max(1, osc_prev)
  double osc_ratio = 1.0;      // osc(t_end)/osc(0), 1 when osc(0) = 0
  double defect_start = 0.0;   // sup |Du|/rho
  double defect_end = 0.0;
  bool defect_decreased = false;
};
AsymptoticsReport asymptotics_report(const std::vector<flow::TraceRecord> &records,
                                     const std::vector<double> &conformal_defect,
                                     double eps_slack = 1e-6);

double conformal_defect(const geom::GeometrySample &g);

struct MonitorOptions {
  std::set<std::string> enabled; // empty: everything
  double eps_slack = 1e-6;
  double C0 = 1.0;
  double companion_gap = 0.05;
  bool residuals = false;
  bool simons = false;
  std::optional<double> cutoff_C_R; // default 2 chi(R) on balls
};

/// Every check id the monitor knows, in column order.
const std::vector<std::string> &check_ids();

/// Drives all enabled checks along a run; use as the flow observer.
class Monitor {
public:
  Monitor(const geom::GraphState &initial, double T, MonitorOptions opts);

  void observe(const geom::GraphState &s, const geom::GeometrySample &g);
  /// End-of-run checks (H schedule, conformal defect) and residual stats.
  void finish();

  const TheoremConstants &constants() const { return k_; }
  const BoundLedger &ledger() const { return ledger_; }
  const std::vector<std::string> &columns() const { return columns_; }
  /// Margins per observed state, aligned with `columns()`; NaN when absent.
  const std::vector<std::vector<double>> &rows() const { return rows_; }
  const std::vector<double> &times() const { return times_; }
  const std::vector<flow::TraceRecord> &records() const { return records_; }

  const std::map<Quantity, std::vector<ResidualNorms>> &residuals() const { return residuals_; }
  const std::vector<SimonsSample> &simons() const { return simons_; }
  const std::vector<BoundaryDefects> &boundary() const { return boundary_; }
  const std::vector<double> &defect_series() const { return defect_; }
  const AsymptoticsReport &asymptotics() const { return asym_; }

private:
  bool on(const std::string &id) const;
  void put(std::vector<double> &row, const std::string &id, double t, double margin);

  MonitorOptions opts_;
  TheoremConstants k_;
  BoundLedger ledger_;
  std::vector<std::string> columns_;
  std::map<std::string, std::size_t> col_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> times_;
  std::vector<flow::TraceRecord> records_;
  std::vector<double> max_H2_;
  std::vector<double> defect_;
  std::optional<flow::SliceCompanion> lower_, upper_;
  double prev_slice_osc_ = 0.0;
  std::vector<geom::GraphState> window_;
  std::map<Quantity, std::vector<ResidualNorms>> residuals_;
  std::vector<SimonsSample> simons_;
  std::vector<BoundaryDefects> boundary_;
  std::optional<double> C_R_;
  AsymptoticsReport asym_;
};

} // namespace grwflow::verify
