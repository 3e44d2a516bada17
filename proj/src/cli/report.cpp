#include <cmath>
#include <cstdio>
#include <sstream>

#include "kt/cli.hpp"
#include "kt/error.hpp"

namespace kt {

namespace {

using nlohmann::json;

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::ostringstream& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      // json objects are std::map backed, so iteration is in sorted key order
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(it.key()).dump(-1, ' ', false, json::error_handler_t::replace) << ": ";
        write(out, it.value(), indent + 2);
      }
      out << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out << ",\n";
        out << pad;
        write(out, j[i], indent + 2);
      }
      out << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      out << number(j.get<double>());
      return;
    default:
      out << j.dump(-1, ' ', false, json::error_handler_t::replace);
  }
}

std::string value_text(const json& v) {
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string emit_plain(const json& d) {
  std::ostringstream out;
  if (d.contains("theory")) out << "theory " << d["theory"].value("name", "") << "\n";
  if (d.contains("derived")) {
    const json& x = d["derived"];
    if (x.contains("el")) {
      for (const auto& [k, v] : x["el"].items()) out << "el[" << k << "] = " << v.get<std::string>() << "\n";
    }
    for (const char* key : {"alpha", "omega", "alpha_boundary", "omega_boundary"}) {
      if (x.contains(key)) out << key << " = " << x[key].get<std::string>() << "\n";
    }
    if (x.contains("constraints")) {
      for (const auto& [k, v] : x["constraints"].items()) out << "constraint " << k << " = " << v.get<std::string>() << "\n";
    }
    if (x.contains("integers")) {
      for (const auto& [k, v] : x["integers"].items()) out << k << " = " << v.dump() << "\n";
    }
  }
  if (d.contains("checks")) {
    for (const auto& [k, v] : d["checks"].items()) {
      out << (v.value("passed", false) ? "PASS " : "FAIL ") << k;
      if (v.contains("value")) out << " = " << value_text(v["value"]);
      if (v.contains("target")) {
        const json& g = v["target"];
        const std::string cmp = g.value("compare", "");
        if (cmp == "max" || cmp == "min") {
          out << (cmp == "max" ? " (<= " : " (>= ") << value_text(g["value"]) << ")";
        } else {
          out << " (" << value_text(g["value"]) << " +- " << value_text(g["tol"]) << ")";
        }
      }
      if (v.contains("reason")) out << ": " << v["reason"].get<std::string>();
      out << "\n";
    }
  }
  if (d.contains("golden")) {
    for (const auto& [k, v] : d["golden"].items()) {
      out << (v.value("passed", false) ? "PASS " : "FAIL ") << "golden " << k << "\n";
    }
  }
  if (d.contains("passed")) out << (d["passed"].get<bool>() ? "all checks passed" : "some checks failed") << "\n";
  return out.str();
}

std::string tex_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '_' || c == '#' || c == '%' || c == '&' || c == '$') out += '\\';
    out += c;
  }
  return out;
}

std::string emit_latex(const json& d) {
  std::ostringstream out;
  out << "\\documentclass{article}\n\\usepackage{amsmath}\n\\begin{document}\n";
  if (d.contains("theory")) out << "\\section*{" << tex_escape(d["theory"].value("name", "")) << "}\n";
  if (d.contains("latex")) {
    const json& x = d["latex"];
    if (x.contains("el")) {
      for (const auto& [k, v] : x["el"].items()) {
        out << "\\[ \\mathrm{el}_{" << tex_escape(k) << "} = " << v.get<std::string>() << " \\]\n";
      }
    }
    const std::pair<const char*, const char*> forms[] = {{"alpha", "\\alpha"},
                                                         {"omega", "\\omega"},
                                                         {"alpha_boundary", "\\alpha^\\partial"},
                                                         {"omega_boundary", "\\omega^\\partial"}};
    for (const auto& [key, sym] : forms) {
      if (x.contains(key)) out << "\\[ " << sym << " = " << x[key].get<std::string>() << " \\]\n";
    }
    if (x.contains("constraints")) {
      for (const auto& [k, v] : x["constraints"].items()) {
        out << "\\[ \\text{" << tex_escape(k) << "}: \\quad " << v.get<std::string>() << " = 0 \\]\n";
      }
    }
  }
  if (d.contains("checks") && !d["checks"].empty()) {
    out << "\\begin{itemize}\n";
    for (const auto& [k, v] : d["checks"].items()) {
      out << "\\item " << (v.value("passed", false) ? "pass" : "fail") << ": \\texttt{" << tex_escape(k) << "}";
      if (v.contains("value")) out << " $= " << value_text(v["value"]) << "$";
      out << "\n";
    }
    out << "\\end{itemize}\n";
  }
  out << "\\end{document}\n";
  return out.str();
}

}  // namespace

ReportFormat report_format(const std::string& name) {
  if (name == "data") return ReportFormat::Data;
  if (name == "latex") return ReportFormat::Latex;
  if (name == "plain") return ReportFormat::Plain;
  throw SpecError("unknown report format '" + name + "'");
}

std::string canonical_json(const json& j) {
  std::ostringstream out;
  write(out, j, 0);
  out << "\n";
  return out.str();
}

std::string emit_report(const Report& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::Data: return canonical_json(r.data.is_null() ? json::object() : r.data);
    case ReportFormat::Latex: return emit_latex(r.data);
    case ReportFormat::Plain: return emit_plain(r.data);
  }
  throw InternalLogicError("unhandled report format");
}

}  // namespace kt
