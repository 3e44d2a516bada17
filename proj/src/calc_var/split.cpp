#include <algorithm>

#include "kt/calc_var.hpp"
#include "kt/error.hpp"

namespace kt {

LocalVarForm variation(const TheorySpec& t) {
  LocalVarForm r(1);
  for (const JetVar& v : t.lagrangian.variables()) {
    if (v.kind == SymbolKind::Field) r.add({v}, diff_jet(t.lagrangian, v));
  }
  return r;
}

namespace {

JetVar drop_deriv(const JetVar& v, int coord) {
  JetVar r = v;
  r.deriv.erase(std::find(r.deriv.begin(), r.deriv.end(), coord));
  return r;
}

// Coordinate to peel next: the smallest tangential one, the transversal last.
int peel_coord(const JetVar& v, int transversal) {
  for (int c : v.deriv) {
    if (c != transversal) return c;
  }
  return transversal;
}

}  // namespace

BoundarySplit ibp_split(const LocalVarForm& v, const TheorySpec& t) {
  if (v.degree() != 1) throw ShapeError("integration by parts needs a degree-1 form");
  std::map<JetVar, Expr> pending;
  for (const auto& [g, c] : v.terms()) pending[g[0]] += c;

  BoundarySplit out;
  std::map<JetVar, Expr> source;
  while (!pending.empty()) {
    auto top = pending.begin();
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      if (it->first.order() > top->first.order()) top = it;
    }
    const JetVar g = top->first;
    const Expr c = top->second;
    pending.erase(top);
    if (c.is_zero()) continue;
    if (g.order() == 0) {
      source[g] += c;
      continue;
    }
    const int k = peel_coord(g, t.transversal);
    const JetVar lower = drop_deriv(g, k);
    if (k == t.transversal) {
      out.alpha.add({lower}, c);
    } else {
      auto [it, inserted] = out.divergence.try_emplace(k, LocalVarForm(1));
      it->second.add({lower}, c);
    }
    pending[lower] -= total_derivative(c, k, t.jet_order);
  }
  for (auto& [field, e] : source) {
    if (!e.is_zero()) out.el.push_back(ElEquation{field, -e});
  }
  return out;
}

namespace {

bool sub_multiset(const std::vector<int>& small, const std::vector<int>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<int> multiset_minus(const std::vector<int>& big, const std::vector<int>& small) {
  std::vector<int> r;
  std::set_difference(big.begin(), big.end(), small.begin(), small.end(), std::back_inserter(r));
  return r;
}

std::optional<Expr> restrict_jet(const JetVar& v, const TheorySpec& t) {
  if (v.kind != SymbolKind::Field || !t.is_bulk_field(v.name)) return std::nullopt;
  const RestrictRule* best = nullptr;
  for (const auto& r : t.restrictions) {
    if (r.lhs.name != v.name || r.lhs.component != v.component) continue;
    if (!sub_multiset(r.lhs.deriv, v.deriv)) continue;
    if (best == nullptr || r.lhs.order() > best->lhs.order()) best = &r;
  }
  const int max_order = t.jet_order + 2;
  if (best != nullptr) {
    Expr out = best->rhs;
    for (int c : multiset_minus(v.deriv, best->lhs.deriv)) out = total_derivative(out, c, max_order);
    return out;
  }
  const int m = v.count_deriv(t.transversal);
  if (m == 0) return std::nullopt;
  JetVar renamed = v;
  renamed.name += "_";
  for (int i = 0; i < m; ++i) renamed.name += t.coords[static_cast<std::size_t>(t.transversal)];
  renamed.deriv.erase(std::remove(renamed.deriv.begin(), renamed.deriv.end(), t.transversal),
                      renamed.deriv.end());
  return Expr(renamed);
}

}  // namespace

Expr boundary_restrict(const Expr& e, const TheorySpec& t) {
  return substitute(e, [&t](const JetVar& v) { return restrict_jet(v, t); });
}

LocalVarForm boundary_restrict(const LocalVarForm& f, const TheorySpec& t) {
  LocalVarForm out(f.degree());
  for (const auto& [gens, c] : f.terms()) {
    LocalVarForm acc = LocalVarForm::scalar(boundary_restrict(c, t));
    for (const JetVar& g : gens) acc = wedge(acc, vertical_delta(boundary_restrict(Expr(g), t)));
    out += acc;
  }
  return out;
}

bool is_boundary_density(const Expr& e, const TheorySpec& t) {
  for (const JetVar& v : e.variables()) {
    if (v.kind != SymbolKind::Field) continue;
    if (v.count_deriv(t.transversal) > 0) return false;
    if (const BoundaryDecl* b = t.boundary_decl(v.name)) {
      if (b->multiplier) return false;
      continue;
    }
    const auto f = std::find_if(t.fields.begin(), t.fields.end(),
                                [&v](const FieldDecl& d) { return d.name == v.name; });
    if (f == t.fields.end()) return false;
    for (std::size_t i = static_cast<std::size_t>(f->internal); i < v.component.size(); ++i) {
      if (v.component[i] == t.transversal) return false;
    }
  }
  return true;
}

std::vector<Constraint> constraint_extract(const TheorySpec& t, const BoundarySplit& split) {
  const ExprContext ctx = t.context();
  std::vector<Constraint> out;
  for (const auto& eq : split.el) {
    const Expr r = boundary_restrict(-eq.density, t);
    if (r.is_zero() || !is_boundary_density(r, t)) continue;
    out.push_back(Constraint{"el[" + jet_text(eq.field, ctx) + "]", eq.field, r});
  }
  return out;
}

std::vector<Constraint> constraint_extract(const TheorySpec& t) {
  return constraint_extract(t, ibp_split(variation(t), t));
}

}  // namespace kt
