#include <set>

#include "kt/calc_var.hpp"
#include "kt/error.hpp"

namespace kt {

ExprContext TheorySpec::context() const {
  ExprContext ctx;
  ctx.coords = coords;
  ctx.transversal = transversal;
  ctx.internal_dim = internal_dim;
  const std::uint32_t time_bit = std::uint32_t{1} << transversal;
  for (const auto& f : fields) {
    SymbolInfo s;
    s.internal = f.internal;
    s.base = f.base;
    s.antisym = f.antisym;
    s.symmetric = f.symmetric;
    s.positive = f.positive;
    ctx.symbols[f.name] = s;
  }
  for (const auto& b : boundary) {
    SymbolInfo s;
    s.internal = b.internal;
    s.base = b.base;
    s.positive = b.positive;
    ctx.symbols[b.name] = s;
  }
  for (const auto& b : backgrounds) {
    SymbolInfo s;
    s.kind = b.constant ? SymbolKind::Constant : SymbolKind::Background;
    s.internal = b.internal;
    s.base = b.base;
    s.symmetric = b.symmetric;
    s.positive = b.positive;
    if (b.constant) {
      s.frozen = ~std::uint32_t{0};
    } else if (b.time_independent) {
      s.frozen = time_bit;
    }
    ctx.symbols[b.name] = s;
  }
  if (!metric.empty()) {
    SymbolInfo inv;
    inv.kind = SymbolKind::Background;
    inv.base = 2;
    inv.symmetric = true;
    inv.frozen = metric_time_independent ? time_bit : 0;
    ctx.symbols[metric + "inv"] = inv;
    SymbolInfo vol = inv;
    vol.base = 0;
    vol.symmetric = false;
    vol.positive = true;
    ctx.symbols["sqrt" + metric] = vol;
  }
  ctx.functions.insert(functions.begin(), functions.end());
  return ctx;
}

bool TheorySpec::is_bulk_field(const std::string& n) const {
  for (const auto& f : fields) {
    if (f.name == n) return true;
  }
  return false;
}

const BoundaryDecl* TheorySpec::boundary_decl(const std::string& n) const {
  for (const auto& b : boundary) {
    if (b.name == n) return &b;
  }
  return nullptr;
}

namespace {

void check_declared(const Expr& e, const ExprContext& ctx, const std::string& where) {
  for (const JetVar& v : e.variables()) {
    auto it = ctx.symbols.find(v.name);
    if (it == ctx.symbols.end()) throw SpecError(where + ": undeclared symbol '" + v.name + "'");
    const SymbolInfo& s = it->second;
    if (static_cast<int>(v.component.size()) != s.internal + s.base) {
      throw SpecError(where + ": wrong number of indices on '" + v.name + "'");
    }
    if (v.kind != s.kind) throw SpecError(where + ": '" + v.name + "' used with the wrong kind");
  }
  std::function<void(const Expr&)> fns = [&](const Expr& x) {
    for (const auto& t : x.terms()) {
      for (const auto& f : t.factors) {
        if (const auto* c = std::get_if<Call>(&f.atom)) {
          if (c->fn != "sqrt" && ctx.functions.count(c->fn) == 0) {
            throw SpecError(where + ": undeclared function '" + c->fn + "'");
          }
          fns(*c->arg);
        }
      }
    }
  };
  fns(e);
}

}  // namespace

void TheorySpec::validate() const {
  if (coords.empty()) throw SpecError("theory '" + name + "' declares no coordinates");
  if (transversal < 0 || transversal >= dim()) throw SpecError("transversal coordinate out of range");
  if (jet_order < 1) throw SpecError("jet order must be at least 1");

  std::set<std::string> names;
  auto claim = [&names](const std::string& n) {
    if (n == "d" || n == "sqrt") throw SpecError("reserved name '" + n + "'");
    if (!names.insert(n).second) throw SpecError("duplicate declaration of '" + n + "'");
  };
  for (const auto& f : fields) claim(f.name);
  for (const auto& b : boundary) claim(b.name);
  for (const auto& b : backgrounds) claim(b.name);
  for (const auto& f : functions) claim(f);
  if (!metric.empty()) {
    claim(metric + "inv");
    claim("sqrt" + metric);
  }
  std::set<std::string> coord_names(coords.begin(), coords.end());
  if (coord_names.size() != coords.size()) throw SpecError("duplicate coordinate name");

  const ExprContext ctx = context();
  check_declared(lagrangian, ctx, "lagrangian");
  for (const JetVar& v : lagrangian.variables()) {
    if (v.order() > jet_order) throw SpecError("lagrangian exceeds the declared jet order");
    if (v.kind == SymbolKind::Field && !is_bulk_field(v.name)) {
      throw SpecError("lagrangian uses boundary symbol '" + v.name + "'");
    }
  }
  for (const auto& r : restrictions) {
    if (!is_bulk_field(r.lhs.name)) throw SpecError("restriction of non-field '" + r.lhs.name + "'");
    check_declared(r.rhs, ctx, "restriction of " + r.lhs.name);
  }
  for (const auto& s : surfaces) check_declared(s, ctx, "surface");
}

bool operator==(const TheorySpec& a, const TheorySpec& b) {
  return a.name == b.name && a.coords == b.coords && a.transversal == b.transversal &&
         a.internal_dim == b.internal_dim && a.fields == b.fields && a.boundary == b.boundary &&
         a.backgrounds == b.backgrounds && a.functions == b.functions && a.metric == b.metric &&
         a.metric_time_independent == b.metric_time_independent && a.lagrangian == b.lagrangian &&
         a.jet_order == b.jet_order && a.restrictions == b.restrictions && a.surfaces == b.surfaces;
}

}  // namespace kt
