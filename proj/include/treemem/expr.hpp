#pragma once

#include <memory>
#include <string>

#include "treemem/tree.hpp"

namespace treemem {

enum class FuncKind { boundary, source };

namespace detail {
struct ExprNode;
}

// A parsed boundary function f(s), s in [0,1], or source function h(k, s).
// Immutable after parse; evaluation is reentrant.
//
// Grammar (documented in the README):
//   expr    := term  (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?            -- right associative
//   primary := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//   var     := 's' | 'k'        ('k' only in source expressions)
//   func    := exp | sin | cos | abs | min | max
class FuncSpec {
 public:
  FuncKind kind() const { return kind_; }
  const std::string& text() const { return text_; }

  // Canonical (fully parenthesized) rendering; parses back to an equivalent tree.
  std::string print() const;

  double eval_boundary(double s) const;
  double eval_source(const NodeId& node, int m) const;
  double eval_source_ks(double k, double s) const;

  // True when the expression never references `s` (so it depends on the node
  // only through its level).
  bool level_only() const;

  FuncSpec(const FuncSpec&);
  FuncSpec(FuncSpec&&) noexcept;
  FuncSpec& operator=(const FuncSpec&);
  FuncSpec& operator=(FuncSpec&&) noexcept;
  ~FuncSpec();

  friend FuncSpec parse(const std::string& text, FuncKind kind);

 private:
  FuncSpec();
  FuncKind kind_ = FuncKind::boundary;
  std::string text_;
  std::shared_ptr<const detail::ExprNode> root_;
  bool uses_s_ = false;
};

// Throws Errc::ParseError (with byte offset in the message) on bad input,
// undeclared variables, or arity mismatch.
FuncSpec parse(const std::string& text, FuncKind kind);

struct QuadratureParams {
  // Panels per interval for composite Simpson; doubled internally when odd.
  int subdivisions = 8;
};

// (1/|iv|) * integral of f over iv by composite Simpson. Exact for
// polynomials of degree <= 3.
double boundary_average(const FuncSpec& f, const Interval& iv,
                        const QuadratureParams& q = {});

}  // namespace treemem
