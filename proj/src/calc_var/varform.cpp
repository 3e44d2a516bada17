#include "kt/calc_var.hpp"
#include "kt/error.hpp"

namespace kt {

LocalVarForm LocalVarForm::scalar(const Expr& f) {
  LocalVarForm r(0);
  r.add({}, f);
  return r;
}

void LocalVarForm::add(std::vector<JetVar> gens, const Expr& coeff) {
  if (static_cast<int>(gens.size()) != degree_) throw ShapeError("generator count differs from form degree");
  if (coeff.is_zero()) return;
  bool negate = false;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = 0; j + 1 < gens.size() - i; ++j) {
      if (gens[j + 1] < gens[j]) {
        std::swap(gens[j], gens[j + 1]);
        negate = !negate;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < gens.size(); ++i) {
    if (gens[i] == gens[i + 1]) return;
  }
  auto it = terms_.find(gens);
  if (it == terms_.end()) {
    terms_.emplace(std::move(gens), negate ? -coeff : coeff);
    return;
  }
  if (negate) {
    it->second -= coeff;
  } else {
    it->second += coeff;
  }
  if (it->second.is_zero()) terms_.erase(it);
}

Expr LocalVarForm::coefficient(const std::vector<JetVar>& gens) const {
  auto it = terms_.find(gens);
  return it == terms_.end() ? Expr() : it->second;
}

LocalVarForm& LocalVarForm::operator+=(const LocalVarForm& o) {
  if (o.degree_ != degree_) throw ShapeError("adding forms of different degree");
  for (const auto& [g, c] : o.terms_) add(g, c);
  return *this;
}

LocalVarForm& LocalVarForm::operator-=(const LocalVarForm& o) {
  if (o.degree_ != degree_) throw ShapeError("subtracting forms of different degree");
  for (const auto& [g, c] : o.terms_) add(g, -c);
  return *this;
}

LocalVarForm operator*(const Expr& c, const LocalVarForm& f) {
  LocalVarForm r(f.degree());
  if (c.is_zero()) return r;
  for (const auto& [g, x] : f.terms()) r.add(g, c * x);
  return r;
}

LocalVarForm wedge(const LocalVarForm& a, const LocalVarForm& b) {
  const int deg = a.degree() + b.degree();
  if (deg > 2) throw ShapeError("vertical degree above 2");
  LocalVarForm r(deg);
  for (const auto& [ga, ca] : a.terms()) {
    for (const auto& [gb, cb] : b.terms()) {
      std::vector<JetVar> g = ga;
      g.insert(g.end(), gb.begin(), gb.end());
      r.add(std::move(g), ca * cb);
    }
  }
  return r;
}

LocalVarForm total_derivative(const LocalVarForm& f, int coord, int max_order) {
  LocalVarForm r(f.degree());
  for (const auto& [g, c] : f.terms()) {
    r.add(g, total_derivative(c, coord, max_order));
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (g[p].order() + 1 > max_order) {
        throw OrderLimitError("total derivative of delta " + g[p].name + " exceeds jet order");
      }
      std::vector<JetVar> h = g;
      h[p] = h[p].with_deriv(coord);
      r.add(std::move(h), c);
    }
  }
  return r;
}

LocalVarForm vertical_delta(const Expr& f) {
  LocalVarForm r(1);
  for (const JetVar& v : f.variables()) {
    if (v.kind == SymbolKind::Field) r.add({v}, diff_jet(f, v));
  }
  return r;
}

LocalVarForm vertical_delta(const LocalVarForm& f) {
  if (f.degree() == 0) return vertical_delta(f.value());
  if (f.degree() != 1) throw ShapeError("vertical differential of a degree-2 form");
  LocalVarForm r(2);
  for (const auto& [g, c] : f.terms()) {
    for (const JetVar& v : c.variables()) {
      if (v.kind == SymbolKind::Field) r.add({v, g[0]}, diff_jet(c, v));
    }
  }
  return r;
}

namespace {

template <class Coeff, class Gen>
std::string form_text(const LocalVarForm& f, Coeff&& coeff, Gen&& gen, const char* join,
                      const char* sep) {
  if (f.is_zero()) return "0";
  if (f.degree() == 0) return coeff(f.value());
  std::string out;
  for (const auto& [g, c0] : f.terms()) {
    Expr c = c0;
    if (!out.empty()) {
      if (c.is_monomial() && c.terms()[0].coeff < 0) {
        out += " - ";
        c = -c;
      } else {
        out += join;
      }
    }
    std::string s;
    if (c == Expr(-1)) {
      s = "-";
    } else if (!(c == Expr(1))) {
      s = coeff(c);
      if (c.terms().size() > 1) s = (sep[0] == '\\' ? "\\left(" + s + "\\right)" : "(" + s + ")");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      s += gen(g[i], s.empty() || s == "-");
      if (i + 1 < g.size() && sep[0] != '\\') s += " ^";
    }
    out += s;
  }
  return out;
}

}  // namespace

std::string to_text(const LocalVarForm& f, const ExprContext& ctx) {
  return form_text(
      f, [&ctx](const Expr& e) { return to_text(e, ctx); },
      [&ctx](const JetVar& v, bool first) { return std::string(first ? "" : " ") + "delta(" + jet_text(v, ctx) + ")"; },
      " + ", " ");
}

std::string to_latex(const LocalVarForm& f, const ExprContext& ctx) {
  return form_text(
      f, [&ctx](const Expr& e) { return to_latex(e, ctx); },
      [&ctx](const JetVar& v, bool first) { return std::string(first ? "" : "\\,") + "\\delta " + jet_latex(v, ctx); },
      " + ", "\\");
}

}  // namespace kt
