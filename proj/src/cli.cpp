#include "grwflow/cli.hpp"

#include "grwflow/errors.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace grwflow::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t levenshtein(const std::string &a, const std::string &b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) {
    row[j] = j;
  }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1u : 0u)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest(const std::string &key, const std::vector<std::string> &candidates) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto &c : candidates) {
    const std::size_t d = levenshtein(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// A JSON object whose keys must all be known.
class Section {
public:
  Section(const json &j, std::string path, std::vector<std::string> keys)
      : j_(j), path_(std::move(path)), keys_(std::move(keys)) {
    if (!j_.is_object()) {
      throw ConfigError(where() + " must be an object");
    }
    for (const auto &[k, v] : j_.items()) {
      if (std::find(keys_.begin(), keys_.end(), k) == keys_.end()) {
        throw ConfigError("unknown key '" + k + "' in " + where() + "; nearest valid key: '" +
                          nearest(k, keys_) + "' (valid: " + list() + ")");
      }
    }
  }

  bool has(const std::string &k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  const json &req(const std::string &k) const {
    if (!has(k)) {
      throw ConfigError("missing required key '" + key(k) + "'");
    }
    return j_.at(k);
  }

  double number(const std::string &k, std::optional<double> def = {}) const {
    if (!has(k)) {
      if (def) {
        return *def;
      }
      req(k);
    }
    const json &v = j_.at(k);
    if (!v.is_number()) {
      throw ConfigError("'" + key(k) + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError("'" + key(k) + "' must be finite");
    }
    return d;
  }

  long integer(const std::string &k, std::optional<long> def = {}) const {
    if (!has(k)) {
      if (def) {
        return *def;
      }
      req(k);
    }
    const json &v = j_.at(k);
    if (!v.is_number_integer()) {
      throw ConfigError("'" + key(k) + "' must be an integer");
    }
    return v.get<long>();
  }

  std::string string(const std::string &k, std::optional<std::string> def = {}) const {
    if (!has(k)) {
      if (def) {
        return *def;
      }
      req(k);
    }
    const json &v = j_.at(k);
    if (!v.is_string()) {
      throw ConfigError("'" + key(k) + "' must be a string");
    }
    return v.get<std::string>();
  }

  bool boolean(const std::string &k, bool def) const {
    if (!has(k)) {
      return def;
    }
    const json &v = j_.at(k);
    if (!v.is_boolean()) {
      throw ConfigError("'" + key(k) + "' must be true or false");
    }
    return v.get<bool>();
  }

  Section sub(const std::string &k, std::vector<std::string> keys, bool required) const {
    static const json empty = json::object();
    if (!has(k)) {
      if (required) {
        req(k);
      }
      return Section(empty, key(k), std::move(keys));
    }
    return Section(j_.at(k), key(k), std::move(keys));
  }

  std::string key(const std::string &k) const { return path_.empty() ? k : path_ + "." + k; }

private:
  std::string where() const { return path_.empty() ? "the top level" : "section '" + path_ + "'"; }
  std::string list() const {
    std::string s;
    for (const auto &k : keys_) {
      s += (s.empty() ? "" : ", ") + k;
    }
    return s;
  }

  const json &j_;
  std::string path_;
  std::vector<std::string> keys_;
};

std::string one_of(const std::string &what, const std::string &value,
                   const std::vector<std::string> &allowed) {
  if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) {
    return value;
  }
  throw ConfigError(what + " '" + value + "' is not valid; nearest: '" + nearest(value, allowed) +
                    "'");
}

} // namespace

RunConfig parse_config_json(const json &j, const std::string &source) {
  RunConfig rc;
  rc.source = source;
  flow::FlowConfig &f = rc.flow;
  const Section top(j, "", {"profile", "leaf", "grid", "time", "initial", "checks", "output"});

  const Section prof = top.sub("profile", {"name", "table", "s_base"}, true);
  std::vector<std::string> names = warp::WarpProfile::catalog_names();
  names.push_back("table");
  f.profile = one_of("profile", prof.string("name"), names);
  if (f.profile == "table") {
    f.profile_table = prof.string("table");
    if (!source.empty() && source.front() != '<' && fs::path(f.profile_table).is_relative()) {
      f.profile_table = (fs::path(source).parent_path() / f.profile_table).string();
    }
  } else if (prof.has("table")) {
    throw ConfigError("'profile.table' is only used with profile.name = \"table\"");
  }
  if (prof.has("s_base")) {
    f.s_base = prof.number("s_base");
  }

  const Section lf = top.sub("leaf", {"n", "K_M", "domain"}, true);
  const long n = lf.integer("n");
  if (n < 1 || n > 64) {
    throw ConfigError("'leaf.n' must be between 1 and 64");
  }
  f.n = static_cast<int>(n);
  f.K_M = lf.number("K_M", 0.0);
  const Section dom = lf.sub("domain", {"type", "a", "b", "R"}, true);
  const std::string dtype = one_of("domain type", dom.string("type"), {"interval", "ball"});
  if (dtype == "interval") {
    if (dom.has("R")) {
      throw ConfigError("'leaf.domain.R' applies to balls; intervals take a and b");
    }
    f.domain = leaf::Domain::interval(dom.number("a"), dom.number("b"));
  } else {
    if (dom.has("a") || dom.has("b")) {
      throw ConfigError("ball domains take only R");
    }
    f.domain = leaf::Domain::ball(dom.number("R"));
  }

  const Section grid = top.sub("grid", {"points"}, true);
  const long pts = grid.integer("points");
  if (pts < 5) {
    throw ConfigError("'grid.points' must be at least 5");
  }
  f.grid = static_cast<std::size_t>(pts);

  const Section tm = top.sub("time", {"t_end", "scheme", "cfl_safety", "dt_max", "imex_factor"},
                             true);
  f.t_end = tm.number("t_end");
  if (!(f.t_end > 0.0)) {
    throw ConfigError("'time.t_end' must be positive");
  }
  const std::string scheme =
      one_of("scheme", tm.string("scheme", "explicit_rk2"), {"explicit_rk2", "imex"});
  f.scheme = scheme == "imex" ? flow::Scheme::imex : flow::Scheme::explicit_rk2;
  f.cfl_safety = tm.number("cfl_safety", 0.4);
  if (!(f.cfl_safety > 0.0 && f.cfl_safety < 1.0)) {
    throw ConfigError("'time.cfl_safety' must lie in (0, 1)");
  }
  f.dt_max = tm.number("dt_max", 1e-2);
  if (!(f.dt_max > 0.0)) {
    throw ConfigError("'time.dt_max' must be positive");
  }
  f.imex_factor = tm.number("imex_factor", 10.0);
  if (!(f.imex_factor >= 1.0)) {
    throw ConfigError("'time.imex_factor' must be >= 1");
  }

  const Section ini = top.sub("initial", {"type", "c", "amplitude", "mode"}, true);
  const std::string itype = one_of("initial type", ini.string("type"), {"constant", "bump"});
  f.initial.c = ini.number("c");
  if (itype == "constant") {
    if (ini.has("amplitude") || ini.has("mode")) {
      throw ConfigError("constant initial data takes only c");
    }
    f.initial.kind = flow::InitialData::Kind::constant;
  } else {
    f.initial.kind = flow::InitialData::Kind::bump;
    f.initial.amplitude = ini.number("amplitude");
    const long mode = ini.integer("mode", 1);
    if (mode < 1) {
      throw ConfigError("'initial.mode' must be >= 1");
    }
    f.initial.mode = static_cast<int>(mode);
  }

  const Section ck = top.sub("checks",
                             {"enabled", "eps_slack", "C0", "companion_gap", "residuals", "simons",
                              "cutoff_C_R"},
                             false);
  verify::MonitorOptions &m = rc.checks;
  json enabled_echo = json::array({"all"});
  if (ck.has("enabled")) {
    const json &e = ck.req("enabled");
    if (!e.is_array()) {
      throw ConfigError("'checks.enabled' must be a list of check ids (or [\"all\"])");
    }
    std::vector<std::string> ids = verify::check_ids();
    std::vector<std::string> allowed = ids;
    allowed.push_back("all");
    bool all = false;
    for (const auto &v : e) {
      if (!v.is_string()) {
        throw ConfigError("'checks.enabled' entries must be strings");
      }
      const std::string id = one_of("check id", v.get<std::string>(), allowed);
      if (id == "all") {
        all = true;
      } else {
        m.enabled.insert(id);
      }
    }
    if (all) {
      m.enabled.clear();
    } else {
      enabled_echo = json::array();
      for (const auto &id : ids) { // canonical order
        if (m.enabled.count(id)) {
          enabled_echo.push_back(id);
        }
      }
      if (m.enabled.empty()) {
        throw ConfigError("'checks.enabled' is empty; use [\"all\"] or list check ids");
      }
    }
  }
  m.eps_slack = ck.number("eps_slack", 1e-6);
  if (!(m.eps_slack >= 0.0)) {
    throw ConfigError("'checks.eps_slack' must be >= 0");
  }
  m.C0 = ck.number("C0", 1.0);
  if (!(m.C0 > 0.0)) {
    throw ConfigError("'checks.C0' must be positive");
  }
  m.companion_gap = ck.number("companion_gap", 0.05);
  if (!(m.companion_gap >= 0.0)) {
    throw ConfigError("'checks.companion_gap' must be >= 0 (0 disables the companions)");
  }
  m.residuals = ck.boolean("residuals", false);
  m.simons = ck.boolean("simons", false);
  if (ck.has("cutoff_C_R")) {
    m.cutoff_C_R = ck.number("cutoff_C_R");
  }

  const Section out = top.sub("output", {"dir", "csv", "report"}, false);
  rc.output.dir = out.string("dir", "out");
  rc.output.csv = out.boolean("csv", true);
  rc.output.report = out.boolean("report", true);

  // Geometry-level validation: profile, leaf and initial data on the grid.
  try {
    auto setup = flow::make_setup(f);
    flow::initial_state(f, setup);
    if (m.simons && (f.profile != "minkowski_product" || f.n != 1 || setup->radial())) {
      throw ConfigError("'checks.simons' needs profile minkowski_product, n = 1 and an interval");
    }
    if (m.cutoff_C_R && !setup->radial()) {
      throw ConfigError("'checks.cutoff_C_R' applies to ball domains only");
    }
    if (setup->radial()) {
      const double R = f.domain.b;
      setup->leaf.cutoff(R, m.cutoff_C_R.value_or(2.0 * setup->leaf.jacobi(R).chi), R);
    }
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }

  json dom_echo = {{"type", dtype}};
  if (dtype == "interval") {
    dom_echo["a"] = f.domain.a;
    dom_echo["b"] = f.domain.b;
  } else {
    dom_echo["R"] = f.domain.b;
  }
  json prof_echo = {{"name", f.profile}, {"s_base", f.s_base ? json(*f.s_base) : json(nullptr)}};
  if (f.profile == "table") {
    prof_echo["table"] = prof.string("table");
  }
  json ini_echo = {{"type", itype}, {"c", f.initial.c}};
  if (itype == "bump") {
    ini_echo["amplitude"] = f.initial.amplitude;
    ini_echo["mode"] = f.initial.mode;
  }
  rc.echo = {
      {"profile", prof_echo},
      {"leaf", {{"n", f.n}, {"K_M", f.K_M}, {"domain", dom_echo}}},
      {"grid", {{"points", f.grid}}},
      {"time",
       {{"t_end", f.t_end},
        {"scheme", scheme},
        {"cfl_safety", f.cfl_safety},
        {"dt_max", f.dt_max},
        {"imex_factor", f.imex_factor}}},
      {"initial", ini_echo},
      {"checks",
       {{"enabled", enabled_echo},
        {"eps_slack", m.eps_slack},
        {"C0", m.C0},
        {"companion_gap", m.companion_gap},
        {"residuals", m.residuals},
        {"simons", m.simons},
        {"cutoff_C_R", m.cutoff_C_R ? json(*m.cutoff_C_R) : json(nullptr)}}},
      {"output", {{"dir", rc.output.dir}, {"csv", rc.output.csv}, {"report", rc.output.report}}},
  };
  return rc;
}

RunConfig parse_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error &e) {
    throw ConfigError(path + ": " + e.what());
  }
  try {
    return parse_config_json(j, path);
  } catch (const ConfigError &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

fs::path resolve_out_dir(const std::string &flag, const RunConfig &cfg) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char *env = std::getenv("GRWFLOW_OUT_DIR"); env && *env) {
    return env;
  }
  return cfg.output.dir;
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json hypothesis_json(const verify::TheoremConstants &k) {
  const warp::HypothesisReport &h = k.hyp;
  return {{"a", h.a},
          {"b", h.b},
          {"rho_prime_nonneg", h.rho_prime_nonneg},
          {"ratio_nonincreasing", h.ratio_nonincreasing},
          {"strict_somewhere", h.strict_somewhere},
          {"ncc", k.ncc},
          {"C_minus_eff", num(h.C_minus_eff)},
          {"C_plus_eff", num(h.C_plus_eff)},
          {"lambda_eff", num(h.lambda_eff)},
          {"ncc_gap_min", num(h.ncc_gap_min)}};
}

json constants_json(const verify::TheoremConstants &k) {
  return {{"T", k.T},
          {"C1", num(k.C1)},
          {"E", k.E ? num(*k.E) : json(nullptr)},
          {"M", k.M ? num(*k.M) : json(nullptr)},
          {"script_M", num(k.script_M)},
          {"beta", num(k.beta)},
          {"eps_slack", k.eps_slack}};
}

void write_csv_row(std::ostream &os, const std::vector<double> &v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << (i ? "," : "") << format_double(v[i]);
  }
  os << '\n';
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const fs::path &p, const std::string &s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + p.string() + "'");
  }
  out << s;
}

} // namespace

RunResult run(const RunConfig &cfg, const fs::path &out_dir, std::ostream &err) {
  RunResult res;
  res.out_dir = out_dir;
  const auto wall0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  std::string error;
  std::optional<verify::Monitor> mon;
  std::optional<geom::GraphState> snapshot;

  try {
    fs::create_directories(out_dir);
    auto setup = flow::make_setup(cfg.flow);
    const geom::GraphState init = flow::initial_state(cfg.flow, setup);
    mon.emplace(init, cfg.flow.t_end, cfg.checks);
    for (const auto &id : mon->ledger().ids()) {
      if (mon->ledger().status(id) == verify::Status::not_applicable && id.rfind("cutoff_", 0) != 0) {
        err << "warning: check '" << id << "' not applicable: " << mon->ledger().note(id) << '\n';
      }
    }
    try {
      flow::run_u(cfg.flow, [&](const geom::GraphState &s, const geom::GeometrySample &g) {
        mon->observe(s, g);
      });
    } catch (const flow::FlowBreakdown &e) {
      error = e.what();
      snapshot = e.last_good();
    }
    mon->finish();
  } catch (const Error &e) {
    error = e.what();
  } catch (const std::exception &e) {
    error = std::string("internal error: ") + e.what();
  }

  try {
    fs::create_directories(out_dir);
    if (snapshot) {
      std::ostringstream os;
      os << "# t=" << format_double(snapshot->t) << "\nx,u\n";
      for (std::size_t i = 0; i < snapshot->size(); ++i) {
        os << format_double(snapshot->setup->x(i)) << ',' << format_double(snapshot->u[i])
           << '\n';
      }
      write_text(out_dir / "snapshot.csv", os.str());
      res.files.push_back(out_dir / "snapshot.csv");
    }
    if (mon && cfg.output.csv) {
      std::ostringstream os;
      os << kTraceHeader << '\n' << "t,min_u,max_u,osc,max_theta,min_H,max_H,max_A2";
      for (const auto &c : mon->columns()) {
        os << ',' << c;
      }
      os << '\n';
      const auto &recs = mon->records();
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const flow::TraceRecord &r = recs[i];
        std::vector<double> row = {r.t,         r.min_u, r.max_u, r.osc,
                                   r.max_theta, r.min_H, r.max_H, r.max_A2};
        row.insert(row.end(), mon->rows()[i].begin(), mon->rows()[i].end());
        write_csv_row(os, row);
      }
      write_text(out_dir / "trace.csv", os.str());
      res.files.push_back(out_dir / "trace.csv");

      if (cfg.checks.residuals) {
        std::ostringstream rs;
        rs << "# grwflow residuals v1\nt";
        const auto &R = mon->residuals();
        for (const auto &[q, v] : R) {
          rs << ',' << verify::to_string(q) << "_sup," << verify::to_string(q) << "_l2";
        }
        rs << '\n';
        const std::size_t rows = R.empty() ? 0 : R.begin()->second.size();
        for (std::size_t i = 0; i < rows; ++i) {
          std::vector<double> row = {R.begin()->second[i].t};
          for (const auto &[q, v] : R) {
            row.push_back(i < v.size() ? v[i].sup : NAN);
            row.push_back(i < v.size() ? v[i].l2 : NAN);
          }
          write_csv_row(rs, row);
        }
        write_text(out_dir / "residuals.csv", rs.str());
        res.files.push_back(out_dir / "residuals.csv");

        std::ostringstream bs;
        bs << "# grwflow boundary v1\nt,rho,Theta,H,kappa,s\n";
        for (std::size_t i = 0; i < mon->boundary().size(); ++i) {
          const auto &b = mon->boundary()[i];
          write_csv_row(bs, {mon->times()[i], b.rho, b.Theta, b.H, b.kappa, b.s});
        }
        write_text(out_dir / "boundary.csv", bs.str());
        res.files.push_back(out_dir / "boundary.csv");
      }
      if (cfg.checks.simons) {
        std::ostringstream ss;
        ss << "# grwflow simons v1\nt,residual_sup,plus_sign_defect_sup\n";
        for (const auto &s : mon->simons()) {
          write_csv_row(ss, {s.t, s.residual_sup, s.plus_sign_defect_sup});
        }
        write_text(out_dir / "simons.csv", ss.str());
        res.files.push_back(out_dir / "simons.csv");
      }
    }

    const bool checks_ok = mon && mon->ledger().all_pass();
    res.verdict = !error.empty() ? "error" : (checks_ok ? "pass" : "fail");
    res.exit_code = !error.empty() ? kRuntimeError : (checks_ok ? kPass : kCheckFailure);
    res.message = error;

    json summary = {{"pass", 0}, {"fail", 0}, {"not-applicable", 0}, {"diagnostic", 0}};
    json checks = json::array();
    if (mon) {
      const auto &L = mon->ledger();
      for (const auto &id : L.ids()) {
        const verify::Status st = L.status(id);
        summary[verify::to_string(st)] = summary[verify::to_string(st)].get<int>() + 1;
        json c = {{"id", id},
                  {"status", verify::to_string(st)},
                  {"min_margin", num(L.min_margin(id))},
                  {"t_of_min_margin", num(L.t_of_min_margin(id))}};
        if (!L.note(id).empty()) {
          c["note"] = L.note(id);
        }
        checks.push_back(c);
      }
    }

    if (cfg.output.report) {
      json rep = {{"format", "grwflow-report"},
                  {"version", 1},
                  {"config", cfg.echo},
                  {"verdict", res.verdict},
                  {"error", error.empty() ? json(nullptr) : json(error)},
                  {"checks", checks}};
      if (mon) {
        const auto &k = mon->constants();
        rep["hypothesis"] = hypothesis_json(k);
        rep["constants"] = constants_json(k);
        if (!mon->records().empty()) {
          const flow::TraceRecord &r = mon->records().back();
          rep["final"] = {{"t", r.t},           {"steps", mon->records().size() - 1},
                          {"min_u", r.min_u},   {"max_u", r.max_u},
                          {"osc", r.osc},       {"max_theta", r.max_theta},
                          {"min_H", r.min_H},   {"max_H", r.max_H},
                          {"max_A2", r.max_A2}};
        }
        const auto &a = mon->asymptotics();
        rep["asymptotics"] = {{"osc_nonincreasing", a.osc_nonincreasing},
                              {"osc_min_margin", num(a.osc_min_margin)},
                              {"osc_ratio", num(a.osc_ratio)},
                              {"conformal_defect_start", num(a.defect_start)},
                              {"conformal_defect_end", num(a.defect_end)},
                              {"conformal_defect_decreased", a.defect_decreased}};
        if (cfg.checks.residuals) {
          json r = json::object();
          for (const auto &[q, v] : mon->residuals()) {
            double sup = 0.0, l2 = 0.0;
            for (const auto &x : v) {
              sup = std::max(sup, x.sup);
              l2 = std::max(l2, x.l2);
            }
            r[verify::to_string(q)] = {{"max_sup", sup}, {"max_l2", l2}};
          }
          rep["residuals"] = r;
          verify::BoundaryDefects worst;
          worst.kappa = 0.0;
          for (const auto &b : mon->boundary()) {
            worst.rho = std::max(worst.rho, b.rho);
            worst.Theta = std::max(worst.Theta, b.Theta);
            worst.H = std::max(worst.H, b.H);
            worst.kappa = std::isnan(b.kappa) ? NAN : std::max(worst.kappa, b.kappa);
            worst.s = std::max(worst.s, b.s);
          }
          rep["boundary"] = {{"rho", worst.rho},
                             {"Theta", worst.Theta},
                             {"H", worst.H},
                             {"kappa", num(worst.kappa)},
                             {"s", worst.s}};
        }
        if (cfg.checks.simons) {
          double a1 = 0.0, a2 = 0.0;
          for (const auto &s : mon->simons()) {
            a1 = std::max(a1, s.residual_sup);
            a2 = std::max(a2, s.plus_sign_defect_sup);
          }
          rep["simons"] = {{"max_residual_sup", a1}, {"max_plus_sign_defect_sup", a2}};
        }
      }
      write_text(out_dir / "report.json", rep.dump(2) + "\n");
      res.files.push_back(out_dir / "report.json");
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    json files = json::array();
    for (const auto &f : res.files) {
      files.push_back(f.string());
    }
    json man = {{"tool", "grwflow"},
                {"version", kToolVersion},
                {"config_path", cfg.source},
                {"config", cfg.echo},
                {"started_at", started},
                {"finished_at", utc_now()},
                {"wall_seconds", wall},
                {"verdict", res.verdict},
                {"exit_code", res.exit_code},
                {"summary", summary},
                {"outputs", files}};
    if (!error.empty()) {
      man["error"] = error;
    }
    write_text(out_dir / "manifest.json", man.dump(2) + "\n");
    res.files.push_back(out_dir / "manifest.json");
  } catch (const std::exception &e) {
    res.exit_code = kRuntimeError;
    res.verdict = "error";
    res.message = error.empty() ? e.what() : error + "; " + e.what();
  }

  if (!res.message.empty()) {
    err << "error: " << res.message << '\n';
    if (snapshot) {
      err << "snapshot of the last accepted state: " << (out_dir / "snapshot.csv").string()
          << '\n';
    }
  }
  if (mon) {
    for (const auto &id : mon->ledger().ids()) {
      if (mon->ledger().status(id) == verify::Status::fail) {
        err << "check failed: " << id << " (min margin "
            << format_double(mon->ledger().min_margin(id)) << " at t="
            << format_double(mon->ledger().t_of_min_margin(id)) << ")";
        if (!mon->ledger().note(id).empty()) {
          err << ": " << mon->ledger().note(id);
        }
        err << '\n';
      }
    }
  }
  return res;
}

int check(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    auto setup = flow::make_setup(cfg.flow);
    const geom::GraphState init = flow::initial_state(cfg.flow, setup);
    const verify::Monitor mon(init, cfg.flow.t_end, cfg.checks);
    const auto &k = mon.constants();
    auto b = [](bool v) { return v ? "true" : "false"; };
    auto opt = [](const std::optional<double> &v) {
      return v ? format_double(*v) : std::string("undefined");
    };
    out << "profile=" << setup->profile.name() << '\n'
        << "range=[" << format_double(k.hyp.a) << ", " << format_double(k.hyp.b) << "]\n"
        << "rho_prime_nonneg=" << b(k.hyp.rho_prime_nonneg) << '\n'
        << "ratio_nonincreasing=" << b(k.hyp.ratio_nonincreasing) << '\n'
        << "strict_somewhere=" << b(k.hyp.strict_somewhere) << '\n'
        << "ncc=" << b(k.ncc) << '\n'
        << "C_minus_eff=" << format_double(k.C_minus_eff) << '\n'
        << "C_plus_eff=" << format_double(k.C_plus_eff) << '\n'
        << "lambda_eff=" << format_double(k.lambda_eff) << '\n'
        << "ncc_gap_min=" << format_double(k.hyp.ncc_gap_min) << '\n'
        << "T=" << format_double(k.T) << '\n'
        << "C1=" << format_double(k.C1) << '\n'
        << "E=" << opt(k.E) << '\n'
        << "M=" << opt(k.M) << '\n'
        << "script_M=" << format_double(k.script_M) << '\n'
        << "beta=" << format_double(k.beta) << '\n';
    for (const auto &id : mon.ledger().ids()) {
      const verify::Status st = mon.ledger().status(id);
      out << "check." << id << '='
          << (st == verify::Status::not_applicable
                  ? "not-applicable"
                  : (st == verify::Status::diagnostic ? "diagnostic" : "applicable"));
      if (!mon.ledger().note(id).empty()) {
        out << " (" << mon.ledger().note(id) << ')';
      }
      out << '\n';
    }
    return kPass;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

std::vector<std::string> expand_glob(const std::string &pattern) {
  glob_t g{};
  std::vector<std::string> out;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      out.emplace_back(g.gl_pathv[i]);
    }
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

int sweep(const std::vector<std::string> &configs, const fs::path &base, unsigned jobs,
          std::ostream &err) {
  if (configs.empty()) {
    err << "error: no config files matched\n";
    return kRuntimeError;
  }
  std::map<std::string, std::string> stems;
  for (const auto &c : configs) {
    const std::string stem = fs::path(c).stem().string();
    if (auto [it, fresh] = stems.emplace(stem, c); !fresh) {
      err << "error: configs '" << it->second << "' and '" << c
          << "' would share the output directory '" << stem << "'\n";
      return kRuntimeError;
    }
  }
  struct Slot {
    int exit_code = kRuntimeError;
    std::string verdict = "error";
    std::string out_dir;
    std::string log;
  };
  std::vector<Slot> slots(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      std::ostringstream log;
      Slot &s = slots[i];
      const fs::path dir = base / fs::path(configs[i]).stem();
      s.out_dir = dir.string();
      try {
        const RunConfig rc = parse_config(configs[i]);
        const RunResult r = run(rc, dir, log);
        s.exit_code = r.exit_code;
        s.verdict = r.verdict;
      } catch (const std::exception &e) {
        log << "error: " << e.what() << '\n';
      }
      s.log = log.str();
      if (!s.log.empty()) {
        std::lock_guard lock(err_mutex);
        std::istringstream lines(s.log);
        for (std::string line; std::getline(lines, line);) {
          err << '[' << fs::path(configs[i]).stem().string() << "] " << line << '\n';
        }
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back(worker);
  }
  for (auto &t : pool) {
    t.join();
  }

  json runs = json::array();
  int worst = kPass;
  json summary = {{"pass", 0}, {"fail", 0}, {"error", 0}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Slot &s = slots[i];
    runs.push_back({{"config", configs[i]},
                    {"out_dir", s.out_dir},
                    {"exit_code", s.exit_code},
                    {"verdict", s.verdict},
                    {"manifest", (fs::path(s.out_dir) / "manifest.json").string()}});
    summary[s.verdict] = summary[s.verdict].get<int>() + 1;
    worst = std::max(worst, s.exit_code);
  }
  try {
    fs::create_directories(base);
    write_text(base / "index.json",
               json{{"tool", "grwflow"}, {"version", kToolVersion}, {"runs", runs},
                    {"summary", summary}}
                       .dump(2) +
                   "\n");
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return worst;
}

} // namespace grwflow::cli
