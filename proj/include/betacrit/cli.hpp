#pragma once

// Subcommand dispatch for the betacrit tool. run() reads a configuration,
// executes one study, writes its CSV table(s) and JSON report atomically and
// maps the outcome onto the exit code: 0 success, 1 validation error,
// 2 numerical failure. Diagnostics go to the error stream as one JSON line.
//
// Needs the generated header betacrit/schema_data.hpp (set up by CMake).

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "betacrit/birman_schwinger.hpp"
#include "betacrit/config.hpp"
#include "betacrit/direct_spectrum.hpp"
#include "betacrit/errors.hpp"
#include "betacrit/experiments.hpp"
#include "betacrit/fkw.hpp"
#include "betacrit/schema_data.hpp"

namespace betacrit::cli {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kGreenNormalization =
    "(H0 - lambda) G = delta with G >= 0; radial sector kernels are the Sturm-Liouville Green function "
    "divided by |S^{d-1}| and integrated against |S^{d-1}| r^{d-1} dr";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"mu-curve", "beta-cr", "direct",    "crosscheck", "fkw",
                                              "scaling",  "halfspace", "clr",    "dichotomy"};
  return names;
}

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  bool verbose = false;
};

inline const json& run_config_schema() {
  static const json s = json::parse(schema_data::kRunConfig);
  return s;
}
inline const json& report_schema() {
  static const json s = json::parse(schema_data::kReport);
  return s;
}

// ---------------------------------------------------------------------------
// formatting

namespace detail {

inline json real(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json reals(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(real(x));
  return a;
}

inline std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}
inline std::string cell(int x) { return std::to_string(x); }
inline std::string cell(bool x) { return x ? "true" : "false"; }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }

class Csv {
public:
  explicit Csv(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += "\n";
  }
  template <class... T>
  void row(const T&... fields) {
    std::string line;
    bool first = true;
    ((line += (first ? "" : ",") + cell(fields), first = false), ...);
    text_ += line + "\n";
  }
  const std::string& text() const { return text_; }

private:
  std::string text_;
};

inline json sample_json(const MuSample& s) {
  return {{"lambda", s.lambda}, {"mu0", s.mu0}, {"m", s.m}, {"residual", s.residual}};
}

inline json samples_json(const std::vector<MuSample>& ss) {
  json a = json::array();
  for (const auto& s : ss) a.push_back(sample_json(s));
  return a;
}

inline json verdict_json(const LimitVerdict& v) {
  return {{"kind", to_string(v.kind)},       {"growth_per_decade", reals(v.growth)},
          {"tail_growth", real(v.tail_growth)}, {"logarithmic", v.logarithmic},
          {"exponent", real(v.exponent)},    {"mu_last", real(v.mu_last)}};
}

inline json numerics_json(const RunConfig& cfg) {
  const Numerics& n = cfg.numerics;
  return {{"m", n.m},
          {"panel_order", n.panel_order},
          {"tol", n.tol},
          {"max_iterations", n.max_iterations},
          {"lambda_grid", cfg.grid()},
          {"max_sector", n.max_sector},
          {"mesh", n.mesh},
          {"r_max", n.r_max},
          {"bisection_tol", n.bisection_tol},
          {"bounded_growth", n.bounded_growth},
          {"divergent_growth", n.divergent_growth}};
}

inline json problem_json(const ProblemSpec& p) {
  return {{"geometry", to_string(p.geometry)},
          {"dimension", p.dimension},
          {"inner_radius", p.inner_radius},
          {"boundary_condition", to_string(p.bc)},
          {"sector", p.sector}};
}

inline json family_json(const ScaledPotentialFamily& f) {
  const auto k = f.base.curve().knots();
  const auto v = f.base.curve().values();
  return {{"offset", f.offset},
          {"decay", f.decay},
          {"dimension", f.dimension},
          {"profile_knots", reals({k.begin(), k.end()})},
          {"profile_values", reals({v.begin(), v.end()})}};
}

inline json level_json(const DirectLevel& l) {
  return {{"mesh", l.mesh}, {"r_max", l.r_max}, {"beta", real(l.beta)}};
}

/// Write to a sibling temporary, then rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string diagnostic(const std::string& kind, const std::string& field, const std::string& message,
                              int code) {
  json d{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  if (!field.empty()) d["field"] = field;
  return d.dump();
}

} // namespace detail

// ---------------------------------------------------------------------------
// subcommands

/// What a subcommand produced. A non-empty failure kind turns into exit 2
/// after the artifacts are written.
struct Outcome {
  std::string key; // report block name
  json result;
  std::vector<std::pair<std::string, std::string>> tables; // (file suffix, csv text)
  std::vector<std::string> notices;
  std::string failure_kind;
  std::string failure_message;

  void fail(std::string kind, std::string message) {
    if (!failure_kind.empty()) return;
    failure_kind = std::move(kind);
    failure_message = std::move(message);
  }
};

namespace detail {

inline const ProblemSpec& need_problem(const RunConfig& c) {
  if (!c.problem) throw ValidationError("problem", "this subcommand needs a problem block");
  return *c.problem;
}
inline const Potential& need_potential(const RunConfig& c) {
  if (!c.potential) throw ValidationError("potential", "this subcommand needs a potential block");
  return *c.potential;
}
inline const ScaledPotentialFamily& need_family(const RunConfig& c) {
  if (!c.family) throw ValidationError("family", "this subcommand needs a family block");
  return *c.family;
}

inline void need_radial(const ProblemSpec& p) {
  if (p.geometry == Geometry::HalfSpace)
    throw ValidationError("problem.geometry", "this subcommand needs a half_line or exterior_ball problem");
}

inline Outcome run_mu_curve(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  need_radial(p);
  const MuCurve curve = mu_curve(p, need_potential(cfg), cfg.grid(), cfg.numerics);
  const LimitVerdict verdict = classify_limit(curve.samples, cfg.numerics);
  Outcome out;
  out.key = "mu_curve";
  out.result = {{"sector", curve.sector},
                {"samples", samples_json(curve.samples)},
                {"monotone", curve.monotone},
                {"worst_violation", real(curve.worst_violation)},
                {"verdict", verdict_json(verdict)},
                {"fitted_slope", real(verdict.exponent)}};
  Csv csv({"lambda", "mu0", "m", "residual"});
  for (const auto& s : curve.samples) csv.row(s.lambda, s.mu0, s.m, s.residual);
  out.tables.emplace_back("", csv.text());
  if (!curve.monotone) out.fail("discretization", "mu0 not monotone in lambda beyond the eigenvalue tolerance");
  if (verdict.kind == LimitKind::Indeterminate) out.fail("indeterminate", "limit classification is indeterminate");
  return out;
}

inline Outcome run_beta_cr(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  need_radial(p);
  std::optional<std::vector<double>> grid;
  if (cfg.lambda_grid) grid = cfg.lambda_grid;
  const BetaCritical bc = beta_critical(p, need_potential(cfg), cfg.study.method, cfg.numerics, grid);
  Outcome out;
  out.key = "beta_cr";
  json sectors = json::array();
  Csv csv({"sector", "lambda", "mu0", "m", "residual"});
  for (const auto& s : bc.sectors) {
    sectors.push_back({{"sector", s.sector},
                       {"method", to_string(s.method)},
                       {"mu_star", real(s.mu_star)},
                       {"mu_limit", real(s.mu_limit)},
                       {"mu_last", real(s.mu_last)},
                       {"mu_extrapolated", real(s.mu_extrapolated)},
                       {"gap", real(s.gap)},
                       {"verdict", s.verdict ? verdict_json(*s.verdict) : json(nullptr)},
                       {"samples", samples_json(s.samples)}});
    for (const auto& m : s.samples) csv.row(s.sector, m.lambda, m.mu0, m.m, m.residual);
    if (s.verdict && s.verdict->kind == LimitKind::Indeterminate)
      out.fail("indeterminate", "limit classification of sector " + std::to_string(s.sector) + " is indeterminate");
  }
  out.result = {{"status", to_string(bc.status)}, {"beta_cr", real(bc.beta_cr)}, {"mu_star", real(bc.mu_star)},
                {"sector", bc.sector},            {"method", to_string(cfg.study.method)}, {"sectors", sectors}};
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome run_direct(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  need_radial(p);
  const Potential& v = need_potential(cfg);
  const DirectBeta db = beta_critical_direct(p, v, cfg.numerics);
  std::vector<double> betas = cfg.study.betas;
  if (betas.empty() && db.status == BetaStatus::Positive) betas = {0.9 * db.beta_cr, 1.1 * db.beta_cr};
  Outcome out;
  out.key = "direct";
  struct Entry {
    CountResult count;
    std::optional<GroundState> ground;
  };
  std::vector<Entry> entries(betas.size());
  Numerics inner = cfg.numerics;
  inner.threads = 1;
  parallel_for(betas.size(), cfg.numerics.threads, [&](std::size_t i) {
    entries[i].count = count_negative(p, v, betas[i], inner);
    entries[i].ground = ground_state(p, v, betas[i]);
  });
  json counts = json::array();
  Csv csv({"beta", "lambda0", "count", "mesh", "R_max", "residual"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const auto& e = entries[i];
    const double l0 = e.ground ? e.ground->lambda0 : nan;
    const double res = e.ground ? e.ground->residual : nan;
    json runs = json::array();
    for (const auto& r : e.count.runs) {
      runs.push_back({{"mesh", r.mesh}, {"r_max", r.r_max}, {"count", r.count}});
      csv.row(betas[i], l0, r.count, r.mesh, r.r_max, res);
    }
    counts.push_back({{"beta", betas[i]}, {"count", e.count.count}, {"converged", e.count.converged},
                      {"lambda0", real(l0)}, {"residual", real(res)}, {"runs", runs}});
    if (!e.count.converged)
      out.fail("unconverged", "negative-eigenvalue count not stable under refinement at beta = " + detail::cell(betas[i]));
  }
  json levels = json::array(), trunc = json::array();
  for (const auto& l : db.levels) levels.push_back(level_json(l));
  for (const auto& l : db.truncation_sequence) trunc.push_back(level_json(l));
  out.result = {{"status", to_string(db.status)}, {"beta_cr", real(db.beta_cr)}, {"richardson", real(db.richardson)},
                {"observed_order", real(db.observed_order)}, {"sector", db.sector}, {"levels", levels},
                {"truncation_sequence", trunc}, {"counts", counts}};
  if (db.status == BetaStatus::Zero)
    out.notices.push_back("beta_cr = 0: the Dirichlet-truncated thresholds in truncation_sequence decrease with R_max");
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome run_crosscheck(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  need_radial(p);
  const std::vector<double> betas = cfg.study.betas.empty() ? std::vector<double>{1.0, 2.0, 4.0} : cfg.study.betas;
  const auto rows = crosscheck_birman_schwinger(p, need_potential(cfg), betas, cfg.numerics);
  Outcome out;
  out.key = "crosscheck";
  json arr = json::array();
  Csv csv({"beta", "lambda0", "mu0", "residual"});
  double worst = rows.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  for (const auto& r : rows) {
    arr.push_back({{"beta", r.beta}, {"lambda0", r.lambda0}, {"mu0", r.mu0}, {"residual", r.residual}});
    csv.row(r.beta, r.lambda0, r.mu0, r.residual);
    worst = std::max(worst, r.residual);
  }
  if (rows.size() < betas.size())
    out.notices.push_back("betas without a bound state were skipped");
  out.result = {{"rows", arr}, {"max_residual", real(worst)}};
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome run_fkw(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  const Potential& v = need_potential(cfg);
  const double beta = cfg.study.beta.value_or(0.0);
  std::vector<double> lambdas = cfg.study.lambdas;
  if (lambdas.empty()) {
    const double top = -(beta * v.max_value() + 1.0);
    for (int k = 0; k < 10; ++k) lambdas.push_back(top * std::pow(2.0, k));
  }
  Outcome out;
  out.key = "fkw";
  std::vector<double> g1(lambdas.size());
  parallel_for(lambdas.size(), cfg.numerics.threads, [&](std::size_t i) { g1[i] = gamma1(p, beta, v, lambdas[i]); });
  json gtab = json::array();
  Csv csv({"lambda", "gamma1"});
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    gtab.push_back({{"lambda", lambdas[i]}, {"gamma1", g1[i]}});
    csv.row(lambdas[i], g1[i]);
  }
  const FkwNormLimit lim = fkw_norm_limit(p, v, cfg.grid(), cfg.numerics);
  json sectors = json::array();
  Csv mu({"sector", "lambda", "mu0", "m", "residual"});
  for (std::size_t i = 0; i < lim.curves.size(); ++i) {
    sectors.push_back({{"sector", lim.curves[i].sector},
                       {"samples", samples_json(lim.curves[i].samples)},
                       {"verdict", verdict_json(lim.verdicts[i])}});
    for (const auto& s : lim.curves[i].samples) mu.row(lim.curves[i].sector, s.lambda, s.mu0, s.m, s.residual);
  }
  if (lim.kind == LimitKind::Indeterminate) out.fail("indeterminate", "FKW norm limit is indeterminate");
  const FkwBeta fb = beta_critical_fkw(p, v, cfg.numerics);
  out.result = {{"beta", beta},
                {"gamma1", gtab},
                {"norm_limit", {{"kind", to_string(lim.kind)}, {"sectors", sectors}, {"gamma1_beta0", reals(lim.gamma1)}}},
                {"beta_critical",
                 {{"status", to_string(fb.status)},
                  {"beta_cr", real(fb.beta_cr)},
                  {"birman_schwinger", real(fb.birman_schwinger.beta_cr)},
                  {"direct", real(fb.direct.beta_cr)}}}};
  for (double g : g1)
    if (!(g > 0.0)) {
      out.notices.push_back("gamma1 <= 0 on the requested lambda grid");
      break;
    }
  out.tables.emplace_back("_gamma1", csv.text());
  out.tables.emplace_back("_mu", mu.text());
  return out;
}

inline Outcome run_scaling(const RunConfig& cfg) {
  const ScaledPotentialFamily& f = need_family(cfg);
  const std::vector<double> grid =
      cfg.study.n_grid.empty() ? std::vector<double>{1, 2, 4, 8, 16, 32} : cfg.study.n_grid;
  const ScalingStudy st = scaling_study_1d(f, grid, cfg.numerics);
  Outcome out;
  out.key = "scaling";
  out.notices = st.notices;
  json rows = json::array();
  Csv csv({"n", "beta_bs", "beta_direct", "oracle", "m", "mesh"});
  double worst = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : st.rows) {
    const double oracle = r.oracle.value_or(std::numeric_limits<double>::quiet_NaN());
    rows.push_back({{"n", r.n}, {"beta_bs", real(r.beta_bs)}, {"beta_direct", real(r.beta_direct)},
                    {"oracle", real(oracle)}, {"m", r.m}, {"mesh", r.mesh}});
    csv.row(r.n, r.beta_bs, r.beta_direct, oracle, r.m, r.mesh);
    if (r.oracle) {
      const double e = std::max(std::abs(r.beta_bs - oracle), std::abs(r.beta_direct - oracle)) / oracle;
      worst = std::isnan(worst) ? e : std::max(worst, e);
    }
  }
  out.result = {{"family", family_json(f)}, {"rows", rows}, {"monotone", st.monotone}, {"max_oracle_error", real(worst)}};
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome run_halfspace(const RunConfig& cfg) {
  const ScaledPotentialFamily& f = need_family(cfg);
  if (f.dimension < 2) throw ValidationError("family.dimension", "half-space studies need d = 2 or 3");
  std::vector<double> grid = cfg.study.n_grid;
  if (grid.empty()) grid = f.dimension == 2 ? std::vector<double>{10, 100, 1000, 10000} : std::vector<double>{1, 2, 4, 8, 16};
  const HalfspaceStudy st = halfspace_norm_study(f.dimension, cfg.study.sign, f, grid, cfg.numerics);
  Outcome out;
  out.key = "halfspace";
  out.notices = st.notices;
  json rows = json::array();
  Csv csv({"n", "nx", "norm", "refined", "lower_bound", "quadrature_converged"});
  for (const auto& r : st.rows) {
    rows.push_back({{"n", r.n}, {"nx", r.nx}, {"norm", real(r.norm)}, {"refined", real(r.refined)},
                    {"lower_bound", real(r.lower_bound)}, {"quadrature_converged", r.quadrature_converged}});
    csv.row(r.n, r.nx, r.norm, r.refined, r.lower_bound, r.quadrature_converged);
  }
  out.result = {{"dimension", st.dimension},
                {"sign", st.sign == ImageSign::Minus ? "minus" : "plus"},
                {"family", family_json(f)},
                {"rows", rows},
                {"classification", st.classification},
                {"minorant", real(st.minorant)},
                {"minorant_bruteforce", real(st.minorant_bruteforce)},
                {"rescaling_gap", real(st.rescaling_gap)}};
  if (st.classification == "unclassified") out.fail("indeterminate", "half-space norm trend is unclassified");
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome run_clr(const RunConfig& cfg) {
  const ProblemSpec& p = need_problem(cfg);
  const std::vector<double> betas =
      cfg.study.betas.empty() ? std::vector<double>{1, 3, 10, 30, 100, 300, 1000} : cfg.study.betas;
  const ClrAudit audit = clr_audit(p, need_potential(cfg), betas, cfg.numerics, cfg.study.clr_constant);
  Outcome out;
  out.key = "clr";
  json rows = json::array();
  Csv csv({"beta", "count", "bound", "violation", "converged", "per_sector"});
  for (const auto& r : audit.rows) {
    std::string sectors;
    for (std::size_t i = 0; i < r.per_sector.size(); ++i) sectors += (i ? ";" : "") + std::to_string(r.per_sector[i]);
    rows.push_back({{"beta", r.beta}, {"count", r.count}, {"bound", r.bound}, {"violation", r.violation},
                    {"converged", r.converged}, {"per_sector", r.per_sector}});
    csv.row(r.beta, r.count, r.bound, r.violation, r.converged, sectors);
    if (!r.converged) out.fail("unconverged", "count not stable under refinement at beta = " + cell(r.beta));
  }
  out.result = {{"clr_constant", cfg.study.clr_constant}, {"rows", rows}, {"violations", audit.violations},
                {"slope", real(audit.slope)}};
  out.tables.emplace_back("", csv.text());
  return out;
}

inline std::vector<LabeledPotential> default_half_line_suite() {
  return {{"indicator[1,2]", Potential::indicator(1, 2)},
          {"hat[1,2.5]", Potential::hat(1, 2.5)},
          {"indicator[0.5,1]", Potential::indicator(0.5, 1)}};
}
inline std::vector<LabeledPotential> default_exterior_disk_suite() {
  return {{"indicator[1.5,2.5]", Potential::indicator(1.5, 2.5)},
          {"indicator[1,2]", Potential::indicator(1, 2)},
          {"indicator[1,1.5]", Potential::indicator(1, 1.5)}};
}

inline Outcome run_dichotomy(const RunConfig& cfg) {
  const auto hl = cfg.study.half_line.empty() ? default_half_line_suite() : cfg.study.half_line;
  const auto ed = cfg.study.exterior_disk.empty() ? default_exterior_disk_suite() : cfg.study.exterior_disk;
  for (std::size_t i = 0; i < hl.size(); ++i)
    if (auto d = validate(ProblemSpec::half_line(BoundaryCondition::Dirichlet), hl[i].potential); !d.empty())
      throw ValidationError("study.half_line[" + std::to_string(i) + "]", d.front().message);
  for (std::size_t i = 0; i < ed.size(); ++i)
    if (auto d = validate(ProblemSpec::exterior_ball(2, 1.0, BoundaryCondition::Dirichlet), ed[i].potential); !d.empty())
      throw ValidationError("study.exterior_disk[" + std::to_string(i) + "]", d.front().message);
  const auto rows = dichotomy_suite(hl, ed, cfg.numerics);
  Outcome out;
  out.key = "dichotomy";
  json arr = json::array();
  Csv csv({"dimension", "bc", "potential", "verdict", "tail_growth", "exponent", "logarithmic", "expected", "matches"});
  int indeterminate = 0, mismatches = 0;
  for (const auto& r : rows) {
    arr.push_back({{"dimension", r.dimension}, {"bc", to_string(r.bc)}, {"potential", r.potential},
                   {"verdict", verdict_json(r.verdict)}, {"expected", to_string(r.expected)}, {"matches", r.matches}});
    csv.row(r.dimension, to_string(r.bc), r.potential, to_string(r.verdict.kind), r.verdict.tail_growth,
            r.verdict.exponent, r.verdict.logarithmic, to_string(r.expected), r.matches);
    indeterminate += r.verdict.kind == LimitKind::Indeterminate ? 1 : 0;
    mismatches += r.matches ? 0 : 1;
  }
  out.result = {{"rows", arr}, {"indeterminate", indeterminate}, {"mismatches", mismatches}};
  if (indeterminate > 0) out.fail("indeterminate", std::to_string(indeterminate) + " indeterminate verdict(s)");
  out.tables.emplace_back("", csv.text());
  return out;
}

inline Outcome dispatch(const std::string& command, const RunConfig& cfg) {
  static const std::map<std::string, std::function<Outcome(const RunConfig&)>> table{
      {"mu-curve", run_mu_curve}, {"beta-cr", run_beta_cr},     {"direct", run_direct},
      {"crosscheck", run_crosscheck}, {"fkw", run_fkw},         {"scaling", run_scaling},
      {"halfspace", run_halfspace}, {"clr", run_clr},           {"dichotomy", run_dichotomy}};
  const auto it = table.find(command);
  if (it == table.end()) throw ValidationError("subcommand", "unknown subcommand " + command);
  return it->second(cfg);
}

inline std::string default_prefix(std::string command) {
  for (char& c : command)
    if (c == '-') c = '_';
  return command;
}

} // namespace detail

/// Report document for one outcome.
inline json make_report(const std::string& command, const RunConfig& cfg, const Outcome& out) {
  json meta{{"tool_version", kToolVersion}, {"green_normalization", kGreenNormalization},
            {"numerics", detail::numerics_json(cfg)}};
  if (cfg.problem) meta["problem"] = detail::problem_json(*cfg.problem);
  json report{{"command", command},
              {"format_version", 1},
              {"status", out.failure_kind.empty() ? "ok" : "numerical_failure"},
              {"metadata", meta},
              {"config", cfg.document},
              {"notices", out.notices},
              {out.key, out.result}};
  if (!out.failure_kind.empty()) report["failure"] = {{"kind", out.failure_kind}, {"message", out.failure_message}};
  return report;
}

/// Execute one subcommand. Returns the process exit code.
inline int run(const Options& opt, std::ostream& err) {
  auto say = [&](const std::string& msg) {
    if (opt.verbose) err << "betacrit: " << msg << "\n";
  };
  try {
    if (std::find(subcommands().begin(), subcommands().end(), opt.command) == subcommands().end())
      throw ValidationError("subcommand", "unknown subcommand " + opt.command);
    if (opt.threads < 1) throw ValidationError("threads", "must be >= 1");
    say("reading " + opt.config_path);
    RunConfig cfg = load_config(opt.config_path, run_config_schema());
    cfg.numerics.threads = opt.threads;
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (!std::filesystem::is_directory(opt.out_dir))
      throw ValidationError("out", "cannot create output directory " + opt.out_dir);

    say("running " + opt.command);
    const Outcome out = detail::dispatch(opt.command, cfg);
    const std::string prefix = cfg.output.prefix.empty() ? detail::default_prefix(opt.command) : cfg.output.prefix;
    const std::filesystem::path dir(opt.out_dir);
    if (cfg.output.csv)
      for (const auto& [suffix, text] : out.tables) {
        detail::write_atomic(dir / (prefix + suffix + ".csv"), text);
        say("wrote " + (dir / (prefix + suffix + ".csv")).string());
      }
    if (cfg.output.json) {
      const json report = make_report(opt.command, cfg, out);
      if (auto bad = schema::validate(report_schema(), report))
        throw std::logic_error("report violates its schema at " + bad->path + ": " + bad->message);
      detail::write_atomic(dir / (prefix + ".json"), report.dump(2) + "\n");
      say("wrote " + (dir / (prefix + ".json")).string());
    }
    if (!out.failure_kind.empty()) {
      err << detail::diagnostic(out.failure_kind, "", out.failure_message, 2) << "\n";
      return 2;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << detail::diagnostic("validation", e.field(), e.what(), 1) << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << detail::diagnostic("validation", "", e.what(), 1) << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << detail::diagnostic(e.kind(), "", e.what(), 2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << detail::diagnostic("internal", "", e.what(), 2) << "\n";
    return 2;
  }
}

} // namespace betacrit::cli
