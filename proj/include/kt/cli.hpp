#pragma once

// Theory files, the derivation pipeline and its reports.
//
// Theory file grammar, one statement per line ('#' starts a comment):
//
//   theory NAME
//   dim D
//   coords X0 X1 ... [@transversal XK]
//   internal N
//   field NAME [base=B] [internal=I] [antisym] [symmetric] [positive]
//   boundary NAME [base=B] [internal=I] [multiplier] [positive]
//   background NAME [base=B] [internal=I] [constant] [time-independent] [symmetric] [positive]
//   function NAME
//   metric split NAME [time-independent]
//   lagrangian "EXPR"
//   restrict "JET" = "EXPR"
//   surface "EXPR"
//   jetorder N

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "kt/calc_var.hpp"
#include "kt/error.hpp"

namespace kt {

/// Throws ParseError (with line and column) on syntax errors, unknown keys,
/// undeclared symbols, duplicate names and repeated transversal marks.
TheorySpec parse_theory(const std::string& text);

/// Canonical text; parse_theory(emit_theory(t)) == t.
std::string emit_theory(const TheorySpec& t);

TheorySpec load_theory_file(const std::string& path);

struct PipelineOptions {
  bool check_golden = false;      // compare against golden(name)
  std::optional<int> lattice;     // grid extent per axis; runs lattice checks
  int point_checks = 0;           // number of sampled pointwise checks
  std::uint64_t seed = 1;
  double tol = 1e-8;              // rank tolerance relative to the largest singular value
};

/// Stage errors are rethrown as StageError naming the stage.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& msg) : Error(stage + ": " + msg), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Report {
  nlohmann::json data;
  bool passed = true;  // every requested check and golden entry passed
};

Report run_pipeline(const TheorySpec& t, const PipelineOptions& options);

enum class ReportFormat { Data, Latex, Plain };

/// Throws SpecError for an unknown name.
ReportFormat report_format(const std::string& name);

/// Deterministic bytes: sorted keys, floats with 17 significant digits.
std::string emit_report(const Report& r, ReportFormat format);

/// Structured-data text of any json value under the same rules.
std::string canonical_json(const nlohmann::json& j);

}  // namespace kt

namespace kt {

/// Numeric results of the sampled checks, keyed by measurement name. Golden
/// targets use the same keys.
using Measurements = std::map<std::string, double>;

/// X = (v, -V'/m) at `points` random states, with m = 1.7 and V(q) = q^4/4 - q^2.
Measurements mechanics_point_checks(int points, std::uint64_t seed, double tol = 1e-8);
/// Rank, spectral gap and kernel direction of the constrained 2-form at random
/// unit velocities (n = 3).
Measurements length_point_checks(int points, std::uint64_t seed, double tol = 1e-8);
/// Exact coframe kernel, injectivity and structural fix on sampled coframes.
Measurements pc4_point_checks(int samples, std::uint64_t seed);
/// Rank on an n-site periodic line and the dt-order of the symplectic current.
Measurements scalar_lattice_checks(int n, std::uint64_t seed, double tol = 1e-8);
/// Gauss generator, brackets and leapfrog Gauss drift on an n^3 grid.
Measurements em_lattice_checks(int n, int steps, int pairs, std::uint64_t seed, double tol = 1e-8);
/// Single-site gauge fields and coisotropy at on-surface states.
Measurements pc4_lattice_checks(int states, std::uint64_t seed, double tol = 1e-8);

}  // namespace kt
