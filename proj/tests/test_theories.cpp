#include "doctest.h"
#include "kt/cli.hpp"
#include "kt/error.hpp"
#include "kt/theories.hpp"

using namespace kt;

TEST_CASE("builtin and golden lookup") {
  CHECK(builtin_names().size() == 5);
  CHECK_THROWS_AS(builtin("yang-mills"), SpecError);
  CHECK_THROWS_AS(golden("yang-mills"), SpecError);
  CHECK(builtin("mechanics").dim() == 1);
  CHECK(builtin("em").dim() == 4);
  CHECK(builtin("pc4").dim() == 4);
}

TEST_CASE("shipped theory files equal the builtins") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const TheorySpec t = load_theory_file(data_dir() + "/theories/" + name + ".theory");
    CHECK(t == builtin(name));
  }
}

TEST_CASE("golden expressions parse and re-normalize to themselves") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const GoldenReport g = golden(name);
    CHECK(g.theory == name);
    const ExprContext ctx = builtin(name).context();
    for (const auto& [field, text] : g.el) CHECK(to_text(parse_expr(text, ctx), ctx) == text);
    for (const auto& [key, text] : g.constraints) CHECK(to_text(parse_expr(text, ctx), ctx) == text);
    for (const auto& [key, target] : g.targets) {
      CAPTURE(key);
      CHECK((target.compare == "abs" || target.compare == "max" || target.compare == "min"));
      CHECK(g.origin.count("targets." + key) == 1);
    }
    for (const char* key : {"el", "alpha", "alpha_boundary", "omega", "omega_boundary", "constraints"}) {
      CHECK(g.origin.count(key) == 1);
    }
  }
}

TEST_CASE("closed forms behind the golden entries") {
  const GoldenReport mech = golden("mechanics");
  CHECK(mech.el.at("q") == "m*q'' + V'(q)");
  CHECK(mech.alpha == "m*q' delta(q)");
  CHECK(mech.constraints.empty());

  CHECK(golden("scalar").alpha_boundary == "phi0*sqrth delta(phi)");
  CHECK(golden("length").integers.at("reduced_rank") == 4);
  CHECK(golden("pc4").integers.at("kernel_dim") == 6);
  CHECK(golden("pc4").integers.at("constraint_count") == 10);

  // Gauss law: sum_i D_i (hinv[i,j] F0[j] sqrth)
  const TheorySpec em = builtin("em");
  const ExprContext ctx = em.context();
  Expr gauss;
  for (int i = 1; i <= 3; ++i) {
    Expr flux;
    for (int j = 1; j <= 3; ++j) {
      flux += make_symbol(ctx, "hinv", {i, j}) * Expr(JetVar::field("F0", {j})) * parse_expr("sqrth", ctx);
    }
    gauss += total_derivative(flux, i);
  }
  const GoldenReport g = golden("em");
  REQUIRE(g.constraints.size() == 1);
  CHECK(g.constraints.begin()->second == to_text(gauss, ctx));
  CHECK(g.integers.at("constraint_terms") == 27);
}

TEST_CASE("pipeline reproduces every symbolic golden entry") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    PipelineOptions o;
    o.check_golden = true;
    const Report r = run_pipeline(builtin(name), o);
    for (const auto& [key, entry] : r.data.at("golden").items()) {
      CAPTURE(key);
      CHECK(entry.at("passed").get<bool>());
    }
    CHECK(r.passed);
  }
}

TEST_CASE("sampled point checks meet the golden targets") {
  for (const char* name : {"mechanics", "length"}) {
    CAPTURE(name);
    PipelineOptions o;
    o.point_checks = 20;
    o.seed = 99;
    const Report r = run_pipeline(builtin(name), o);
    CHECK(!r.data.at("checks").empty());
    CHECK(r.passed);
  }
  const Measurements m = pc4_point_checks(10, 3);
  CHECK(m.at("kernel_dim_min") == 6);
  CHECK(m.at("kernel_dim_max") == 6);
  CHECK(m.at("injective_failures") == 0);
  CHECK(m.at("structural_residual_failures") == 0);
}

TEST_CASE("requested checks for another theory are reported as failed") {
  TheorySpec t = builtin("mechanics");
  t.lagrangian = parse_expr("1/2*m*q'^2", t.context());
  PipelineOptions o;
  o.point_checks = 5;
  const Report r = run_pipeline(t, o);
  CHECK_FALSE(r.passed);
  CHECK(r.data.at("checks").at("point").at("passed") == false);

  o.point_checks = 0;
  o.check_golden = true;
  const Report g = run_pipeline(t, o);
  CHECK_FALSE(g.passed);
  CHECK(g.data.at("golden").at("el").at("passed") == false);
}
