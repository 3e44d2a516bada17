#include "kt/expr.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kt/error.hpp"

namespace kt {

namespace {

template <class T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_rational(const Rational& a, const Rational& b) {
  const int c = cmp(a, b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int floor_div2(int p) { return p >= 0 ? p / 2 : -((-p + 1) / 2); }

Rational rat_pow(const Rational& base, int n) {
  if (n < 0) {
    if (base == 0) throw DomainError("division by zero in exact power");
    Rational inv = 1 / base;
    return rat_pow(inv, -n);
  }
  Rational r = 1;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

bool is_sqrt(const Call& c) { return c.fn == "sqrt"; }

// The argument of sqrt is a single declared-positive variable to the first power.
const JetVar* positive_symbol_arg(const Call& c) {
  const auto& ts = c.arg->terms();
  if (ts.size() != 1 || ts[0].coeff != 1 || ts[0].factors.size() != 1) return nullptr;
  const Factor& f = ts[0].factors[0];
  if (f.power != 1) return nullptr;
  const auto* v = std::get_if<JetVar>(&f.atom);
  return (v != nullptr && v->positive) ? v : nullptr;
}

void sort_merge_factors(std::vector<Factor>& fs) {
  std::sort(fs.begin(), fs.end(),
            [](const Factor& a, const Factor& b) { return compare(a.atom, b.atom) < 0; });
  std::vector<Factor> out;
  out.reserve(fs.size());
  for (auto& f : fs) {
    if (!out.empty() && compare(out.back().atom, f.atom) == 0) {
      out.back().power += f.power;
    } else {
      out.push_back(std::move(f));
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Factor& f) { return f.power == 0; }),
            out.end());
  fs = std::move(out);
}

// Canonicalize one monomial. Returns false if the monomial vanishes.
bool canonical_term(Term& t, const NormalizeOptions& opts) {
  if (t.coeff == 0) return false;
  std::vector<Factor> fs;
  fs.reserve(t.factors.size());
  for (auto& f : t.factors) {
    if (f.power == 0) continue;
    if (auto* c = std::get_if<Call>(&f.atom)) {
      Expr arg = normalize(*c->arg, opts);
      if (is_sqrt(*c)) {
        if (arg.is_zero()) {
          if (f.power > 0) return false;
          throw DomainError("sqrt(0) raised to a negative power");
        }
        if (arg.is_constant()) {
          const Rational v = arg.constant_value();
          if (v < 0) throw DomainError("sqrt of a negative rational");
          if (is_perfect_square(v.get_num()) && is_perfect_square(v.get_den())) {
            mpz_class n, d;
            mpz_sqrt(n.get_mpz_t(), v.get_num_mpz_t());
            mpz_sqrt(d.get_mpz_t(), v.get_den_mpz_t());
            t.coeff *= rat_pow(Rational(n, d), f.power);
            continue;
          }
        }
      }
      fs.push_back(Factor{Call{c->fn, c->order, std::make_shared<const Expr>(std::move(arg))}, f.power});
    } else {
      fs.push_back(std::move(f));
    }
  }
  sort_merge_factors(fs);

  // sqrt(x)^p -> x^(p div 2) sqrt(x)^(p mod 2) for declared-positive x.
  bool changed = false;
  std::vector<Factor> extra;
  for (auto& f : fs) {
    auto* c = std::get_if<Call>(&f.atom);
    if (c == nullptr || !is_sqrt(*c)) continue;
    const JetVar* x = positive_symbol_arg(*c);
    if (x == nullptr) continue;
    const int q = floor_div2(f.power);
    if (q == 0) continue;
    extra.push_back(Factor{*x, q});
    f.power -= 2 * q;
    changed = true;
  }
  if (changed) {
    for (auto& f : extra) fs.push_back(std::move(f));
    sort_merge_factors(fs);
  }
  t.factors = std::move(fs);
  if (bit_size(t.coeff) > opts.max_coeff_bits) {
    throw ResourceLimitError("rational coefficient exceeds " + std::to_string(opts.max_coeff_bits) +
                             " bits");
  }
  return true;
}

bool term_less(const Term& a, const Term& b) { return compare_factors(a.factors, b.factors) < 0; }

// Merge a list of canonical terms: sort, add like terms, drop zeros.
std::vector<Term> combine(std::vector<Term> ts) {
  std::stable_sort(ts.begin(), ts.end(), term_less);
  std::vector<Term> out;
  out.reserve(ts.size());
  for (auto& t : ts) {
    if (!out.empty() && compare_factors(out.back().factors, t.factors) == 0) {
      out.back().coeff += t.coeff;
    } else {
      if (!out.empty() && out.back().coeff == 0) out.pop_back();
      out.push_back(std::move(t));
    }
  }
  if (!out.empty() && out.back().coeff == 0) out.pop_back();
  return out;
}

Expr monomial(Rational coeff, std::vector<Factor> factors) {
  std::vector<Term> ts;
  ts.push_back(Term{std::move(coeff), std::move(factors)});
  return normalize(Expr::raw(std::move(ts)));
}

// Generic derivation: d(atom) for jet variables is supplied by `dvar`;
// function calls are handled through the chain rule.
Expr derive(const Expr& e, const std::function<std::optional<JetVar>(const JetVar&)>& dvar_jet,
            const std::function<bool(const JetVar&)>& dvar_is_one) {
  std::vector<Term> raw;
  Expr nonpoly;  // contributions from function calls
  for (const Term& t : e.terms()) {
    for (std::size_t j = 0; j < t.factors.size(); ++j) {
      const Factor& f = t.factors[j];
      if (const auto* v = std::get_if<JetVar>(&f.atom)) {
        const bool one = dvar_is_one && dvar_is_one(*v);
        std::optional<JetVar> dv;
        if (!one) {
          dv = dvar_jet ? dvar_jet(*v) : std::nullopt;
          if (!dv) continue;
        }
        Term nt;
        nt.coeff = t.coeff * f.power;
        nt.factors = t.factors;
        nt.factors[j].power -= 1;
        if (dv) nt.factors.push_back(Factor{*dv, 1});
        raw.push_back(std::move(nt));
      } else {
        const Call& c = std::get<Call>(f.atom);
        Expr darg = derive(*c.arg, dvar_jet, dvar_is_one);
        if (darg.is_zero()) continue;
        std::vector<Factor> rest;
        for (std::size_t k = 0; k < t.factors.size(); ++k) {
          if (k != j) rest.push_back(t.factors[k]);
        }
        Expr outer;
        if (is_sqrt(c)) {
          rest.push_back(Factor{f.atom, f.power - 2});
          outer = monomial(t.coeff * Rational(f.power, 2), std::move(rest));
        } else {
          rest.push_back(Factor{f.atom, f.power - 1});
          rest.push_back(Factor{Call{c.fn, c.order + 1, c.arg}, 1});
          outer = monomial(t.coeff * f.power, std::move(rest));
        }
        nonpoly += outer * darg;
      }
    }
  }
  return normalize(Expr::raw(std::move(raw))) + nonpoly;
}

}  // namespace

// ---------------------------------------------------------------------------
// JetVar

JetVar JetVar::field(std::string name, std::vector<int> component) {
  JetVar v;
  v.name = std::move(name);
  v.component = std::move(component);
  return v;
}

JetVar JetVar::background(std::string name, std::vector<int> component, std::uint32_t frozen) {
  JetVar v;
  v.name = std::move(name);
  v.component = std::move(component);
  v.kind = SymbolKind::Background;
  v.frozen = frozen;
  return v;
}

JetVar JetVar::constant(std::string name) {
  JetVar v;
  v.name = std::move(name);
  v.kind = SymbolKind::Constant;
  v.frozen = ~std::uint32_t{0};
  return v;
}

JetVar JetVar::with_deriv(int coord) const {
  JetVar v = *this;
  v.deriv.insert(std::upper_bound(v.deriv.begin(), v.deriv.end(), coord), coord);
  return v;
}

JetVar JetVar::with_derivs(const std::vector<int>& coords) const {
  JetVar v = *this;
  for (int c : coords) v.deriv.push_back(c);
  std::sort(v.deriv.begin(), v.deriv.end());
  return v;
}

JetVar JetVar::base() const {
  JetVar v = *this;
  v.deriv.clear();
  return v;
}

JetVar JetVar::as_positive() const {
  JetVar v = *this;
  v.positive = true;
  return v;
}

int JetVar::count_deriv(int coord) const {
  return static_cast<int>(std::count(deriv.begin(), deriv.end(), coord));
}

std::strong_ordering operator<=>(const JetVar& a, const JetVar& b) {
  if (auto c = a.name <=> b.name; c != 0) return c;
  if (auto c = a.component <=> b.component; c != 0) return c;
  if (auto c = a.deriv <=> b.deriv; c != 0) return c;
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (auto c = a.frozen <=> b.frozen; c != 0) return c;
  return a.positive <=> b.positive;
}

// ---------------------------------------------------------------------------
// Ordering

int compare(const Atom& a, const Atom& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (const auto* va = std::get_if<JetVar>(&a)) {
    const auto c = *va <=> std::get<JetVar>(b);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  const Call& ca = std::get<Call>(a);
  const Call& cb = std::get<Call>(b);
  if (int c = cmp3(ca.fn, cb.fn)) return c;
  if (int c = cmp3(ca.order, cb.order)) return c;
  return compare(*ca.arg, *cb.arg);
}

int compare_factors(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i].atom, b[i].atom)) return c;
    if (int c = cmp3(a[i].power, b[i].power)) return c;
  }
  return cmp3(a.size(), b.size());
}

int compare(const Expr& a, const Expr& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  const std::size_t n = std::min(ta.size(), tb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_factors(ta[i].factors, tb[i].factors)) return c;
    if (int c = compare_rational(ta[i].coeff, tb[i].coeff)) return c;
  }
  return cmp3(ta.size(), tb.size());
}

// ---------------------------------------------------------------------------
// Expr

Expr::Expr(long c) : Expr(Rational(c)) {}

Expr::Expr(const Rational& c) {
  if (c != 0) terms_.push_back(Term{c, {}});
}

Expr::Expr(const JetVar& v) { terms_.push_back(Term{1, {Factor{v, 1}}}); }

Expr Expr::call(const std::string& fn, int order, const Expr& arg) {
  return monomial(1, {Factor{Call{fn, order, std::make_shared<const Expr>(arg)}, 1}});
}

Expr Expr::sqrt(const Expr& arg) { return call("sqrt", 0, arg); }

Expr Expr::raw(std::vector<Term> terms) {
  Expr e;
  e.terms_ = std::move(terms);
  return e;
}

bool Expr::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].factors.empty());
}

Rational Expr::constant_value() const { return terms_.empty() ? Rational(0) : terms_[0].coeff; }

std::set<JetVar> Expr::variables() const {
  std::set<JetVar> out;
  for (const auto& t : terms_) {
    for (const auto& f : t.factors) {
      if (const auto* v = std::get_if<JetVar>(&f.atom)) {
        out.insert(*v);
      } else {
        auto inner = std::get<Call>(f.atom).arg->variables();
        out.insert(inner.begin(), inner.end());
      }
    }
  }
  return out;
}

Expr Expr::operator-() const {
  Expr r = *this;
  for (auto& t : r.terms_) t.coeff = -t.coeff;
  return r;
}

Expr& Expr::operator+=(const Expr& o) {
  if (o.terms_.empty()) return *this;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  auto i = terms_.begin();
  auto j = o.terms_.begin();
  while (i != terms_.end() || j != o.terms_.end()) {
    int c = 0;
    if (i == terms_.end()) {
      c = 1;
    } else if (j == o.terms_.end()) {
      c = -1;
    } else {
      c = compare_factors(i->factors, j->factors);
    }
    if (c < 0) {
      merged.push_back(std::move(*i++));
    } else if (c > 0) {
      merged.push_back(*j++);
    } else {
      Rational s = i->coeff + j->coeff;
      if (s != 0) merged.push_back(Term{std::move(s), std::move(i->factors)});
      ++i;
      ++j;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

Expr& Expr::operator-=(const Expr& o) { return *this += -o; }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.is_constant()) {
    Expr r = b;
    const Rational c = a.constant_value();
    for (auto& t : r.terms_) t.coeff *= c;
    return r;
  }
  if (b.is_constant()) return b * a;
  std::vector<Term> raw;
  raw.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      Term t;
      t.coeff = ta.coeff * tb.coeff;
      t.factors.reserve(ta.factors.size() + tb.factors.size());
      t.factors = ta.factors;
      t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
      raw.push_back(std::move(t));
    }
  }
  return normalize(Expr::raw(std::move(raw)));
}

Expr& Expr::operator*=(const Expr& o) { return *this = *this * o; }

Expr normalize(const Expr& e, const NormalizeOptions& opts) {
  std::vector<Term> ts;
  ts.reserve(e.terms_.size());
  for (const auto& t : e.terms_) {
    Term c = t;
    if (canonical_term(c, opts)) ts.push_back(std::move(c));
  }
  Expr out;
  out.terms_ = combine(std::move(ts));
  return out;
}

Expr pow(const Expr& e, int n) {
  if (n < 0) {
    if (!e.is_monomial()) throw DomainError("negative power of a non-monomial expression");
    const Term& t = e.terms()[0];
    std::vector<Factor> fs = t.factors;
    for (auto& f : fs) f.power *= n;
    return monomial(rat_pow(t.coeff, n), std::move(fs));
  }
  Expr result = 1;
  Expr base = e;
  while (n > 0) {
    if (n & 1) result *= base;
    n >>= 1;
    if (n > 0) base *= base;
  }
  return result;
}

Expr diff_jet(const Expr& e, const JetVar& v) {
  return derive(e, nullptr, [&v](const JetVar& u) { return u == v; });
}

Expr total_derivative(const Expr& e, int coord, int max_order) {
  const std::uint32_t bit = coord < 32 ? (std::uint32_t{1} << coord) : 0;
  return derive(
      e,
      [&](const JetVar& u) -> std::optional<JetVar> {
        if (u.kind == SymbolKind::Constant || (u.frozen & bit) != 0) return std::nullopt;
        if (u.order() + 1 > max_order) {
          throw OrderLimitError("total derivative of " + u.name + " exceeds jet order " +
                                std::to_string(max_order));
        }
        return u.with_deriv(coord);
      },
      nullptr);
}

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const JetVar&)>& rule) {
  std::vector<Term> untouched;
  Expr changed;
  for (const auto& t : e.terms()) {
    bool any = false;
    Expr prod = Expr(t.coeff);
    std::vector<Factor> kept;
    for (const auto& f : t.factors) {
      if (const auto* v = std::get_if<JetVar>(&f.atom)) {
        if (auto r = rule(*v)) {
          any = true;
          prod *= pow(*r, f.power);
          continue;
        }
        kept.push_back(f);
      } else {
        const Call& c = std::get<Call>(f.atom);
        Expr arg = substitute(*c.arg, rule);
        if (!(arg == *c.arg)) {
          any = true;
          prod *= pow(Expr::call(c.fn, c.order, arg), f.power);
          continue;
        }
        kept.push_back(f);
      }
    }
    if (!any) {
      untouched.push_back(t);
    } else {
      prod *= monomial(1, std::move(kept));
      changed += prod;
    }
  }
  return Expr::raw(std::move(untouched)) + changed;
}

// ---------------------------------------------------------------------------
// Evaluation

double to_double(const Number& n) {
  if (const auto* r = std::get_if<Rational>(&n)) return r->get_d();
  return std::get<double>(n);
}

bool is_exact(const Number& n) { return std::holds_alternative<Rational>(n); }

Number operator+(const Number& a, const Number& b) {
  if (is_exact(a) && is_exact(b)) return Rational(std::get<Rational>(a) + std::get<Rational>(b));
  return to_double(a) + to_double(b);
}

Number operator*(const Number& a, const Number& b) {
  if (is_exact(a) && is_exact(b)) return Rational(std::get<Rational>(a) * std::get<Rational>(b));
  return to_double(a) * to_double(b);
}

namespace {

Number number_pow(const Number& base, int n) {
  if (const auto* r = std::get_if<Rational>(&base)) return rat_pow(*r, n);
  const double d = std::get<double>(base);
  if (d == 0.0 && n < 0) throw DomainError("division by zero in evaluation");
  return std::pow(d, n);
}

Number number_sqrt(const Number& x) {
  if (const auto* r = std::get_if<Rational>(&x)) {
    if (*r < 0) throw DomainError("sqrt of a negative rational");
    if (is_perfect_square(r->get_num()) && is_perfect_square(r->get_den())) {
      mpz_class n, d;
      mpz_sqrt(n.get_mpz_t(), r->get_num_mpz_t());
      mpz_sqrt(d.get_mpz_t(), r->get_den_mpz_t());
      return Rational(n, d);
    }
    return std::sqrt(r->get_d());
  }
  const double d = std::get<double>(x);
  if (d < 0) throw DomainError("sqrt of a negative number");
  return std::sqrt(d);
}

std::string describe(const JetVar& v) {
  std::string s = v.name;
  if (!v.component.empty()) {
    s += '[';
    for (std::size_t i = 0; i < v.component.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v.component[i]);
    }
    s += ']';
  }
  for (int d : v.deriv) s += "_" + std::to_string(d);
  return s;
}

}  // namespace

Number evaluate(const Expr& e, const EvalEnv& env) {
  Number total = Rational(0);
  for (const auto& t : e.terms()) {
    Number prod = t.coeff;
    for (const auto& f : t.factors) {
      Number base;
      if (const auto* v = std::get_if<JetVar>(&f.atom)) {
        auto val = env.var ? env.var(*v) : std::nullopt;
        if (!val) throw UnboundError("unbound variable " + describe(*v));
        base = *val;
      } else {
        const Call& c = std::get<Call>(f.atom);
        const Number arg = evaluate(*c.arg, env);
        if (c.fn == "sqrt") {
          base = number_sqrt(arg);
        } else {
          auto val = env.fn ? env.fn(c.fn, c.order, arg) : std::nullopt;
          if (!val) throw UnboundError("unbound function " + c.fn);
          base = *val;
        }
      }
      prod = prod * number_pow(base, f.power);
    }
    total = total + prod;
  }
  return total;
}

Number evaluate(const Expr& e, const std::map<JetVar, Number>& point) {
  EvalEnv env;
  env.var = [&point](const JetVar& v) -> std::optional<Number> {
    auto it = point.find(v);
    if (it == point.end()) return std::nullopt;
    return it->second;
  };
  return evaluate(e, env);
}

}  // namespace kt
