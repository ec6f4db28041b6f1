#pragma once

// RunConfig: the JSON run description read by the command-line tool. Schema
// checks come first (see json_schema.hpp); this file maps the document onto
// model and numerics types and adds the cross-field checks a schema cannot
// express. Field names in ValidationError follow the document's dotted paths.

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "betacrit/birman_schwinger.hpp"
#include "betacrit/errors.hpp"
#include "betacrit/experiments.hpp"
#include "betacrit/json_schema.hpp"
#include "betacrit/model.hpp"
#include "betacrit/numerics.hpp"

namespace betacrit {

using nlohmann::json;

struct StudyConfig {
  BetaMethod method = BetaMethod::Auto;
  std::optional<double> beta;
  std::vector<double> betas;
  std::vector<double> lambdas;
  std::vector<double> n_grid;
  ImageSign sign = ImageSign::Minus;
  double clr_constant = kClrConstant3;
  std::vector<LabeledPotential> half_line;
  std::vector<LabeledPotential> exterior_disk;
};

struct OutputConfig {
  std::string prefix; // empty: derived from the subcommand
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  std::optional<ProblemSpec> problem;
  std::optional<Potential> potential;
  std::optional<ScaledPotentialFamily> family;
  Numerics numerics;
  std::optional<std::vector<double>> lambda_grid; // explicit grid overrides the decades
  StudyConfig study;
  OutputConfig output;
  json document; // the validated input, echoed into reports

  std::vector<double> grid() const { return lambda_grid ? *lambda_grid : numerics.lambda_grid(); }
};

namespace config_detail {

inline std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

template <class T>
void assign(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj[key].get<T>();
}

inline Potential parse_potential(const json& j, const std::string& path) {
  const std::string kind = j["kind"].get<std::string>();
  const double amp = j.value("amplitude", 1.0);
  try {
    if (kind == "zero") return Potential::zero();
    if (kind == "indicator" || kind == "hat") {
      if (!j.contains("support")) throw ValidationError(path + ".support", "required for kind " + kind);
      const auto s = numbers(j["support"]);
      if (!(s[1] > s[0])) throw ValidationError(path + ".support", "support must have hi > lo");
      return kind == "indicator" ? Potential::indicator(s[0], s[1], amp) : Potential::hat(s[0], s[1], amp);
    }
    if (!j.contains("knots") || !j.contains("values"))
      throw ValidationError(path + ".knots", "a sampled potential needs knots and values");
    return Potential::sampled(numbers(j["knots"]), numbers(j["values"]), amp);
  } catch (const ValidationError& e) {
    if (e.field().rfind(path, 0) == 0) throw;
    throw ValidationError(path, e.what());
  }
}

inline std::string label_of(const json& j) {
  if (j.contains("label")) return j["label"].get<std::string>();
  std::string s = j["kind"].get<std::string>();
  if (j.contains("support")) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%g,%g]", j["support"][0].get<double>(), j["support"][1].get<double>());
    s += buf;
  }
  return s;
}

inline ProblemSpec parse_problem(const json& j) {
  ProblemSpec p;
  const std::string g = j["geometry"].get<std::string>();
  p.geometry = g == "half_line" ? Geometry::HalfLine : g == "exterior_ball" ? Geometry::ExteriorBall : Geometry::HalfSpace;
  const std::string bc = j["boundary_condition"].get<std::string>();
  p.bc = bc == "dirichlet" ? BoundaryCondition::Dirichlet
         : bc == "neumann" ? BoundaryCondition::Neumann
                           : BoundaryCondition::Fkw;
  p.dimension = j.value("dimension", p.geometry == Geometry::HalfLine ? 1 : 3);
  if (p.geometry == Geometry::ExteriorBall) p.inner_radius = j.value("inner_radius", 1.0);
  else if (j.contains("inner_radius"))
    throw ValidationError("problem.inner_radius", "only meaningful for the exterior ball");
  p.sector = j.value("sector", 0);
  if (j.contains("coefficient")) {
    try {
      p.coefficient = CoefficientProfile(numbers(j["coefficient"]["knots"]), numbers(j["coefficient"]["values"]));
    } catch (const ValidationError& e) {
      throw ValidationError("problem.coefficient", e.what());
    }
  }
  return p;
}

inline ScaledPotentialFamily parse_family(const json& j) {
  ScaledPotentialFamily f;
  const std::string profile = j.value("profile", std::string("indicator"));
  try {
    if (profile == "bump") f.base = UnitProfile::bump();
    else if (profile == "sampled") {
      if (!j.contains("knots") || !j.contains("values"))
        throw ValidationError("family.knots", "a sampled profile needs knots and values");
      f.base = UnitProfile(numbers(j["knots"]), numbers(j["values"]));
    }
  } catch (const ValidationError& e) {
    if (e.field().rfind("family", 0) == 0) throw;
    throw ValidationError("family.knots", e.what());
  }
  if (f.base.curve().min_value() < 0.0) throw ValidationError("family.values", "profile must be nonnegative");
  assign(j, "offset", f.offset);
  assign(j, "decay", f.decay);
  assign(j, "dimension", f.dimension);
  return f;
}

/// Maps model diagnostic codes onto document paths.
inline std::string model_field(const std::string& code) {
  if (code == "support" || code == "potential") return code == "support" ? "potential.support" : "potential";
  return "problem." + code;
}

} // namespace config_detail

/// Build a RunConfig from a document already checked against the schema.
inline RunConfig parse_config(const json& doc) {
  using namespace config_detail;
  RunConfig cfg;
  cfg.document = doc;
  if (doc.contains("problem")) {
    cfg.problem = parse_problem(doc["problem"]);
    if (doc["problem"].contains("max_sector")) cfg.numerics.max_sector = doc["problem"]["max_sector"].get<int>();
  }
  if (doc.contains("potential")) cfg.potential = parse_potential(doc["potential"], "potential");
  if (doc.contains("family")) cfg.family = parse_family(doc["family"]);

  if (doc.contains("numerics")) {
    const json& n = doc["numerics"];
    Numerics& num = cfg.numerics;
    assign(n, "m", num.m);
    assign(n, "panel_order", num.panel_order);
    assign(n, "tol", num.tol);
    assign(n, "max_iterations", num.max_iterations);
    if (n.contains("lambda_decades")) {
      num.decade_lo = n["lambda_decades"][0].get<int>();
      num.decade_hi = n["lambda_decades"][1].get<int>();
    }
    if (n.contains("lambda_grid")) {
      cfg.lambda_grid = numbers(n["lambda_grid"]);
      try {
        check_lambda_grid(*cfg.lambda_grid);
      } catch (const std::exception& e) {
        throw ValidationError("numerics.lambda_grid", e.what());
      }
    }
    assign(n, "mesh", num.mesh);
    if (n.contains("r_max")) num.r_max = numbers(n["r_max"]);
    assign(n, "bisection_tol", num.bisection_tol);
    assign(n, "bounded_growth", num.bounded_growth);
    assign(n, "divergent_growth", num.divergent_growth);
  }
  cfg.numerics.check();

  if (doc.contains("study")) {
    const json& s = doc["study"];
    StudyConfig& st = cfg.study;
    if (s.contains("method")) {
      const std::string m = s["method"].get<std::string>();
      st.method = m == "auto" ? BetaMethod::Auto : m == "limit-kernel" ? BetaMethod::LimitKernel : BetaMethod::Extrapolation;
    }
    if (s.contains("beta")) st.beta = s["beta"].get<double>();
    if (s.contains("betas")) st.betas = numbers(s["betas"]);
    if (s.contains("lambdas")) st.lambdas = numbers(s["lambdas"]);
    if (s.contains("n_grid")) st.n_grid = numbers(s["n_grid"]);
    if (s.contains("sign")) st.sign = s["sign"].get<std::string>() == "plus" ? ImageSign::Plus : ImageSign::Minus;
    assign(s, "clr_constant", st.clr_constant);
    for (const char* key : {"half_line", "exterior_disk"}) {
      if (!s.contains(key)) continue;
      auto& list = std::string(key) == "half_line" ? st.half_line : st.exterior_disk;
      for (std::size_t i = 0; i < s[key].size(); ++i) {
        const std::string path = std::string("study.") + key + "[" + std::to_string(i) + "]";
        list.push_back({label_of(s[key][i]), parse_potential(s[key][i], path)});
      }
    }
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    assign(o, "prefix", cfg.output.prefix);
    assign(o, "csv", cfg.output.csv);
    assign(o, "json", cfg.output.json);
    for (char c : cfg.output.prefix)
      if (c == '/' || c == '\\') throw ValidationError("output.prefix", "prefix must be a plain file name stem");
  }

  if (cfg.problem && cfg.potential) {
    const auto diags = validate(*cfg.problem, *cfg.potential);
    if (!diags.empty()) throw ValidationError(model_field(diags.front().code), diags.front().message);
  } else if (cfg.problem) {
    const auto diags = validate(*cfg.problem, Potential::zero());
    if (!diags.empty()) throw ValidationError(model_field(diags.front().code), diags.front().message);
  }
  return cfg;
}

/// Read, schema-check and parse a configuration file.
inline RunConfig load_config(const std::string& path, const json& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  if (auto bad = schema::validate(schema, doc)) throw ValidationError(bad->path, bad->message);
  return parse_config(doc);
}

} // namespace betacrit
