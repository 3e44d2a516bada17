// ktw: derive and check reduced phase space structures of a theory file.
//
//   ktw derive THEORY [options]   symbolic pipeline and requested checks
//   ktw check THEORY [options]    additionally compare against the golden report
//
// THEORY is a .theory file or the name of a shipped theory. Exit status: 0 all
// checks passed, 1 parse or usage error, 2 check failure, 3 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "CLI11.hpp"
#include "kt/cli.hpp"
#include "kt/error.hpp"
#include "kt/theories.hpp"

namespace {

constexpr int kParseError = 1;
constexpr int kCheckFailed = 2;
constexpr int kInternal = 3;

kt::TheorySpec load(const std::string& what) {
  if (std::filesystem::exists(what)) return kt::load_theory_file(what);
  const auto& names = kt::builtin_names();
  if (std::find(names.begin(), names.end(), what) != names.end()) {
    return kt::load_theory_file(kt::data_dir() + "/theories/" + what + ".theory");
  }
  throw kt::SpecError("no theory file or shipped theory named '" + what + "'");
}

// "N" or "NxNxN" with equal extents
int lattice_extent(const std::string& s) {
  static const std::regex pattern(R"((\d{1,4})(?:x(\d{1,4})x(\d{1,4}))?)");
  std::smatch m;
  if (!std::regex_match(s, m, pattern)) throw kt::SpecError("lattice must be N or NxNxN, got '" + s + "'");
  const int n = std::stoi(m[1]);
  if (m[2].matched && (std::stoi(m[2]) != n || std::stoi(m[3]) != n)) {
    throw kt::SpecError("lattice extents must be equal, got '" + s + "'");
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kijowski-Tulczyjew workbench"};
  app.require_subcommand(1);
  std::string theory, lattice, format = "data", out;
  int point_checks = 0;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  for (auto* sub : {app.add_subcommand("derive", "run the symbolic pipeline and requested checks"),
                    app.add_subcommand("check", "also compare every derived entry with the golden report")}) {
    sub->add_option("theory", theory, "theory file or shipped theory name")->required();
    sub->add_option("--lattice", lattice, "lattice extent, N or NxNxN");
    sub->add_option("--point-checks", point_checks, "number of sampled pointwise checks")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "random seed (KT_SEED overrides)");
    sub->add_option("--tol", tol, "relative rank tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"data", "latex", "plain"}));
    sub->add_option("--out", out, "write the report here instead of stdout");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kParseError;
  }

  try {
    if (const char* env = std::getenv("KT_SEED")) seed = std::stoull(env);
  } catch (const std::exception&) {
    std::cerr << "error: KT_SEED is not an unsigned integer\n";
    return kParseError;
  }

  kt::PipelineOptions options;
  options.check_golden = app.got_subcommand("check");
  options.point_checks = point_checks;
  options.seed = seed;
  options.tol = tol;
  kt::TheorySpec spec;
  try {
    if (!lattice.empty()) options.lattice = lattice_extent(lattice);
    spec = load(theory);
  } catch (const kt::ParseError& e) {
    std::cerr << theory << ":" << e.what() << "\n";
    return kParseError;
  } catch (const kt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }

  try {
    const kt::Report report = kt::run_pipeline(spec, options);
    const std::string bytes = kt::emit_report(report, kt::report_format(format));
    if (out.empty()) {
      std::cout << bytes;
    } else {
      std::ofstream f(out, std::ios::binary);
      f << bytes;
      if (!f) throw kt::Error("cannot write '" + out + "'");
    }
    return report.passed ? 0 : kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
