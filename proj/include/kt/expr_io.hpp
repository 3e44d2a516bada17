#pragma once

// Text form of expressions.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' '-'? INT)?
//   atom   := NUMBER | '(' expr ')' | FN '\''* '(' expr ')' | jet
//   jet    := ('d[' COORD ']')* NAME ('[' INT (',' INT)* ']')? '\''*
//
// Primes on a jet differentiate along the transversal coordinate; d[x] prefixes
// along any coordinate (by name or index). Primes on a function name select its
// derivative: V'(q).

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kt/expr.hpp"

namespace kt {

struct SymbolInfo {
  SymbolKind kind = SymbolKind::Field;
  int internal = 0;  // number of internal indices (range 0..internal_dim-1)
  int base = 0;      // number of base indices (range 0..dim-1)
  bool antisym = false;    // first two indices antisymmetric
  bool symmetric = false;  // first two indices symmetric
  bool positive = false;
  std::uint32_t frozen = 0;
};

struct ExprContext {
  std::map<std::string, SymbolInfo> symbols;
  std::set<std::string> functions;
  std::vector<std::string> coords;
  int transversal = 0;
  int internal_dim = 4;
};

/// Canonical component of an indexed symbol. Applies the declared index
/// symmetry, so the result may carry a sign or vanish.
Expr make_symbol(const ExprContext& ctx, const std::string& name, std::vector<int> indices);

/// Parse expression text. `line`/`column` locate the first character for errors.
Expr parse_expr(const std::string& text, const ExprContext& ctx, int line = 1, int column = 1);

std::string jet_text(const JetVar& v, const ExprContext& ctx);
std::string to_text(const Expr& e, const ExprContext& ctx);

std::string jet_latex(const JetVar& v, const ExprContext& ctx);
std::string to_latex(const Expr& e, const ExprContext& ctx);

}  // namespace kt
