#include "treemem/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "treemem/errors.hpp"

namespace treemem {

namespace detail {

enum class Op { num, var_s, var_k, neg, add, sub, mul, div, pow, exp, sin, cos, abs, min, max };

struct ExprNode {
  Op op;
  double value = 0.0;  // for Op::num
  std::shared_ptr<const ExprNode> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::num;
  n->value = v;
  return n;
}

[[noreturn]] void fail(const std::string& msg, std::size_t offset) {
  std::ostringstream os;
  os << msg << " at byte " << offset;
  throw Error(Errc::ParseError, os.str());
}

struct Parser {
  const std::string& text;
  FuncKind kind;
  std::size_t pos = 0;
  bool uses_s = false;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (eat('+'))
        lhs = make(Op::add, lhs, parse_term());
      else if (eat('-'))
        lhs = make(Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (eat('*'))
        lhs = make(Op::mul, lhs, parse_factor());
      else if (eat('/'))
        lhs = make(Op::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    skip_ws();
    if (eat('-')) return make(Op::neg, parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    if (eat('^')) return make(Op::pow, base, parse_factor());  // right associative
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression", pos);
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      if (!eat(')')) fail("expected ')'", pos);
      return e;
    }
    fail(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    const char* start = text.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start) fail("malformed number", pos);
    pos += static_cast<std::size_t>(end - start);
    return make_num(v);
  }

  NodePtr parse_ident() {
    std::size_t start = pos;
    while (pos < text.size() &&
           std::isalnum(static_cast<unsigned char>(text[pos])))
      ++pos;
    std::string name = text.substr(start, pos - start);
    if (name == "s") {
      uses_s = true;
      return make(Op::var_s);
    }
    if (name == "k") {
      if (kind != FuncKind::source)
        fail("variable 'k' is only available in source expressions", start);
      return make(Op::var_k);
    }
    Op op;
    int arity;
    if (name == "exp") op = Op::exp, arity = 1;
    else if (name == "sin") op = Op::sin, arity = 1;
    else if (name == "cos") op = Op::cos, arity = 1;
    else if (name == "abs") op = Op::abs, arity = 1;
    else if (name == "min") op = Op::min, arity = 2;
    else if (name == "max") op = Op::max, arity = 2;
    else fail("unknown identifier '" + name + "'", start);

    if (!eat('(')) fail("expected '(' after function name", pos);
    std::vector<NodePtr> args;
    args.push_back(parse_expr());
    while (eat(',')) args.push_back(parse_expr());
    if (!eat(')')) fail("expected ')'", pos);
    if (static_cast<int>(args.size()) != arity)
      fail("function '" + name + "' expects " + std::to_string(arity) + " argument(s)", start);
    return arity == 1 ? make(op, args[0]) : make(op, args[0], args[1]);
  }
};

double checked(double v) {
  if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "expression produced a non-finite value");
  return v;
}

double eval_node(const ExprNode& n, double s, double k) {
  switch (n.op) {
    case Op::num: return n.value;
    case Op::var_s: return s;
    case Op::var_k: return k;
    case Op::neg: return -eval_node(*n.a, s, k);
    case Op::add: return checked(eval_node(*n.a, s, k) + eval_node(*n.b, s, k));
    case Op::sub: return checked(eval_node(*n.a, s, k) - eval_node(*n.b, s, k));
    case Op::mul: return checked(eval_node(*n.a, s, k) * eval_node(*n.b, s, k));
    case Op::div: return checked(eval_node(*n.a, s, k) / eval_node(*n.b, s, k));
    case Op::pow: return checked(std::pow(eval_node(*n.a, s, k), eval_node(*n.b, s, k)));
    case Op::exp: return checked(std::exp(eval_node(*n.a, s, k)));
    case Op::sin: return checked(std::sin(eval_node(*n.a, s, k)));
    case Op::cos: return checked(std::cos(eval_node(*n.a, s, k)));
    case Op::abs: return std::fabs(eval_node(*n.a, s, k));
    case Op::min: return std::fmin(eval_node(*n.a, s, k), eval_node(*n.b, s, k));
    case Op::max: return std::fmax(eval_node(*n.a, s, k), eval_node(*n.b, s, k));
  }
  throw Error(Errc::ParseError, "corrupt expression tree");
}

void print_node(const ExprNode& n, std::ostream& os) {
  auto bin = [&](const char* sym) {
    os << '(';
    print_node(*n.a, os);
    os << sym;
    print_node(*n.b, os);
    os << ')';
  };
  auto call = [&](const char* name) {
    os << name << '(';
    print_node(*n.a, os);
    if (n.b) {
      os << ',';
      print_node(*n.b, os);
    }
    os << ')';
  };
  switch (n.op) {
    case Op::num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      os << buf;
      return;
    }
    case Op::var_s: os << 's'; return;
    case Op::var_k: os << 'k'; return;
    case Op::neg:
      os << "(-";
      print_node(*n.a, os);
      os << ')';
      return;
    case Op::add: bin("+"); return;
    case Op::sub: bin("-"); return;
    case Op::mul: bin("*"); return;
    case Op::div: bin("/"); return;
    case Op::pow: bin("^"); return;
    case Op::exp: call("exp"); return;
    case Op::sin: call("sin"); return;
    case Op::cos: call("cos"); return;
    case Op::abs: call("abs"); return;
    case Op::min: call("min"); return;
    case Op::max: call("max"); return;
  }
}

}  // namespace
}  // namespace detail

FuncSpec::FuncSpec() = default;
FuncSpec::FuncSpec(const FuncSpec&) = default;
FuncSpec::FuncSpec(FuncSpec&&) noexcept = default;
FuncSpec& FuncSpec::operator=(const FuncSpec&) = default;
FuncSpec& FuncSpec::operator=(FuncSpec&&) noexcept = default;
FuncSpec::~FuncSpec() = default;

FuncSpec parse(const std::string& text, FuncKind kind) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first == text.size()) throw Error(Errc::ParseError, "empty expression");

  detail::Parser p{text, kind};
  auto root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw Error(Errc::ParseError,
                "trailing input at byte " + std::to_string(p.pos));

  FuncSpec fs;
  fs.kind_ = kind;
  fs.text_ = text;
  fs.root_ = std::move(root);
  fs.uses_s_ = p.uses_s;
  return fs;
}

std::string FuncSpec::print() const {
  std::ostringstream os;
  detail::print_node(*root_, os);
  return os.str();
}

double FuncSpec::eval_boundary(double s) const {
  if (kind_ != FuncKind::boundary)
    throw Error(Errc::InvalidConfig, "eval_boundary on a source expression");
  return detail::checked(detail::eval_node(*root_, s, 0.0));
}

double FuncSpec::eval_source_ks(double k, double s) const {
  if (kind_ != FuncKind::source)
    throw Error(Errc::InvalidConfig, "eval_source on a boundary expression");
  return detail::checked(detail::eval_node(*root_, s, k));
}

double FuncSpec::eval_source(const NodeId& node, int m) const {
  return eval_source_ks(static_cast<double>(node.level), psi(node, m));
}

bool FuncSpec::level_only() const { return !uses_s_; }

double boundary_average(const FuncSpec& f, const Interval& iv, const QuadratureParams& q) {
  if (q.subdivisions < 1) throw Error(Errc::InvalidConfig, "quadrature subdivisions must be >= 1");
  int n = q.subdivisions;
  if (n % 2) n *= 2;  // composite Simpson needs an even panel count
  const double h = iv.width() / n;
  double sum = f.eval_boundary(iv.lo) + f.eval_boundary(iv.hi);
  for (int i = 1; i < n; ++i) {
    double w = (i % 2) ? 4.0 : 2.0;
    sum += w * f.eval_boundary(iv.lo + i * h);
  }
  double integral = sum * (h / 3.0);
  return integral / iv.width();
}

}  // namespace treemem
