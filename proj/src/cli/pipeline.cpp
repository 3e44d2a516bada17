#include <cmath>
#include <functional>

#include "kt/cli.hpp"
#include "kt/error.hpp"
#include "kt/theories.hpp"

namespace kt {

namespace {

using nlohmann::json;

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

std::size_t form_terms(const LocalVarForm& f) {
  std::size_t n = 0;
  for (const auto& [gens, c] : f.terms()) n += c.terms().size();
  return n;
}

bool is_shipped(const TheorySpec& t) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), t.name) == names.end()) return false;
  return builtin(t.name) == t;
}

std::optional<GoldenReport> golden_for(const TheorySpec& t) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), t.name) == names.end()) return std::nullopt;
  return golden(t.name);
}

bool target_passes(const GoldenTarget& g, double x) {
  if (std::isnan(x)) return false;
  if (g.compare == "max") return x <= g.value;
  if (g.compare == "min") return x >= g.value;
  return std::abs(x - g.value) <= g.tol;
}

json target_json(const GoldenTarget& g) {
  return {{"value", g.value}, {"tol", g.tol}, {"compare", g.compare}};
}

}  // namespace

Report run_pipeline(const TheorySpec& t, const PipelineOptions& options) {
  Report r;
  json& d = r.data;
  const ExprContext ctx = t.context();
  d["theory"] = {{"name", t.name},
                 {"dim", t.dim()},
                 {"coords", t.coords},
                 {"transversal", t.coords.at(static_cast<std::size_t>(t.transversal))}};
  d["options"] = {{"seed", options.seed},
                  {"tol", options.tol},
                  {"point_checks", options.point_checks},
                  {"lattice", options.lattice ? json(*options.lattice) : json(nullptr)},
                  {"golden", options.check_golden}};
  json stages = json::array();
  json derived, latex;
  std::map<std::string, long> integers;

  const LocalVarForm var = stage("variation", [&] { return variation(t); });
  integers["lagrangian_terms"] = static_cast<long>(t.lagrangian.terms().size());
  stages.push_back({{"stage", "variation"}, {"terms", form_terms(var)}});

  const BoundarySplit split = stage("ibp_split", [&] { return ibp_split(var, t); });
  {
    json el = json::object(), el_tex = json::object();
    for (const auto& eq : split.el) {
      el[jet_text(eq.field, ctx)] = to_text(eq.density, ctx);
      el_tex[jet_text(eq.field, ctx)] = to_latex(eq.density, ctx);
    }
    derived["el"] = el;
    latex["el"] = el_tex;
    derived["alpha"] = to_text(split.alpha, ctx);
    latex["alpha"] = to_latex(split.alpha, ctx);
    integers["el_count"] = static_cast<long>(split.el.size());
    integers["alpha_terms"] = static_cast<long>(form_terms(split.alpha));
    integers["divergence_coords"] = static_cast<long>(split.divergence.size());
    stages.push_back({{"stage", "ibp_split"},
                      {"el", el},
                      {"alpha", derived["alpha"]},
                      {"divergence_coords", split.divergence.size()}});
  }

  const LocalVarForm omega = stage("vertical_delta", [&] { return vertical_delta(split.alpha); });
  derived["omega"] = to_text(omega, ctx);
  latex["omega"] = to_latex(omega, ctx);
  integers["omega_terms"] = static_cast<long>(form_terms(omega));
  stages.push_back({{"stage", "vertical_delta"}, {"omega", derived["omega"]}});

  stage("boundary_restrict", [&] {
    const LocalVarForm ab = boundary_restrict(split.alpha, t);
    const LocalVarForm wb = vertical_delta(ab);
    derived["alpha_boundary"] = to_text(ab, ctx);
    derived["omega_boundary"] = to_text(wb, ctx);
    latex["alpha_boundary"] = to_latex(ab, ctx);
    latex["omega_boundary"] = to_latex(wb, ctx);
    integers["omega_boundary_terms"] = static_cast<long>(form_terms(wb));
    stages.push_back({{"stage", "boundary_restrict"},
                      {"alpha_boundary", derived["alpha_boundary"]},
                      {"omega_boundary", derived["omega_boundary"]}});
  });

  stage("constraint_extract", [&] {
    const std::vector<Constraint> cs = constraint_extract(t, split);
    json c = json::object(), c_tex = json::object();
    long terms = 0;
    for (const auto& k : cs) {
      c[k.name] = to_text(k.density, ctx);
      c_tex[k.name] = to_latex(k.density, ctx);
      terms += static_cast<long>(k.density.terms().size());
    }
    derived["constraints"] = c;
    latex["constraints"] = c_tex;
    integers["constraint_count"] = static_cast<long>(cs.size());
    integers["constraint_terms"] = terms;
    stages.push_back({{"stage", "constraint_extract"}, {"constraints", c}});
  });

  // sampled checks, judged against the golden targets of the shipped theory
  const std::optional<GoldenReport> gold = stage("golden", [&] { return golden_for(t); });
  json checks = json::object();
  auto judge = [&](const std::string& group, const Measurements& m) {
    for (const auto& [key, value] : m) {
      const auto it = gold->targets.find(key);
      if (it == gold->targets.end()) continue;
      const bool ok = target_passes(it->second, value);
      checks[group + "." + key] = {{"value", value}, {"target", target_json(it->second)}, {"passed", ok}};
      r.passed = r.passed && ok;
    }
  };
  auto unavailable = [&](const std::string& group, const std::string& why) {
    checks[group] = {{"passed", false}, {"reason", why}};
    r.passed = false;
  };
  const bool shipped = is_shipped(t);

  if (options.point_checks > 0) {
    stage("point_checks", [&] {
      const int k = options.point_checks;
      Measurements m;
      if (!shipped) {
        unavailable("point", "pointwise checks exist only for the shipped theories");
      } else if (t.name == "mechanics") {
        m = mechanics_point_checks(k, options.seed, options.tol);
      } else if (t.name == "length") {
        m = length_point_checks(k, options.seed, options.tol);
        if (m["rank_min"] == m["rank_max"]) integers["reduced_rank"] = std::lround(m["rank_min"]);
      } else if (t.name == "pc4") {
        m = pc4_point_checks(k, options.seed);
        if (m["kernel_dim_min"] == m["kernel_dim_max"]) integers["kernel_dim"] = std::lround(m["kernel_dim_min"]);
      } else {
        unavailable("point", "theory " + t.name + " has no pointwise checks");
      }
      stages.push_back({{"stage", "point_checks"}, {"measurements", m}});
      if (!m.empty()) judge("point", m);
    });
  }
  if (options.lattice) {
    stage("lattice", [&] {
      const int n = *options.lattice;
      Measurements m;
      if (!shipped) {
        unavailable("lattice", "lattice checks exist only for the shipped theories");
      } else if (t.name == "scalar") {
        m = scalar_lattice_checks(n, options.seed, options.tol);
      } else if (t.name == "em") {
        m = em_lattice_checks(n, 1000, 20, options.seed, options.tol);
      } else if (t.name == "pc4") {
        m = pc4_lattice_checks(20, options.seed, options.tol);
      } else {
        unavailable("lattice", "theory " + t.name + " has no lattice checks");
      }
      stages.push_back({{"stage", "lattice"}, {"measurements", m}});
      if (!m.empty()) judge("lattice", m);
    });
  }

  derived["integers"] = integers;
  d["derived"] = derived;
  d["latex"] = latex;
  d["stages"] = stages;
  d["checks"] = checks;

  if (options.check_golden) {
    json g = json::object();
    auto entry = [&](const std::string& key, const json& expected, const json& actual) {
      const bool ok = expected == actual;
      g[key] = {{"expected", expected}, {"actual", actual}, {"passed", ok}};
      if (gold) {
        const auto it = gold->origin.find(key);
        if (it != gold->origin.end()) g[key]["origin"] = it->second;
      }
      r.passed = r.passed && ok;
    };
    if (!gold) {
      g["theory"] = {{"passed", false}, {"reason", "no golden report for theory " + t.name}};
      r.passed = false;
    } else {
      entry("el", gold->el, derived["el"]);
      entry("alpha", gold->alpha, derived["alpha"]);
      entry("alpha_boundary", gold->alpha_boundary, derived["alpha_boundary"]);
      entry("omega", gold->omega, derived["omega"]);
      entry("omega_boundary", gold->omega_boundary, derived["omega_boundary"]);
      entry("constraints", gold->constraints, derived["constraints"]);
      for (const auto& [key, value] : gold->integers) {
        const auto it = integers.find(key);
        if (it != integers.end()) entry("integers." + key, value, it->second);
      }
    }
    d["golden"] = g;
  }
  d["passed"] = r.passed;
  return r;
}

}  // namespace kt
