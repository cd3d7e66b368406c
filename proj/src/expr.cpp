#include "reebpa/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace reebpa {

namespace {

constexpr std::array<std::string_view, kVarCount> kVarNames = {"t", "r", "th", "x", "y"};

enum class Kind : std::uint8_t { number, pi, variable, neg, add, sub, mul, div, pow, call };
enum class Func : std::uint8_t { sin, cos, exp, sqrt, abs };

constexpr std::array<std::string_view, 5> kFuncNames = {"sin", "cos", "exp", "sqrt", "abs"};

std::optional<Func> func_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFuncNames.size(); ++i)
    if (kFuncNames[i] == name) return static_cast<Func>(i);
  return std::nullopt;
}

}  // namespace

struct Expression::Node {
  Kind kind = Kind::number;
  double value = 0.0;
  Var var = Var::t;
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::number;
  n->value = v;
  return n;
}

NodePtr make_unary(Kind k, NodePtr operand) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr e = sum();
    skip_space();
    if (pos_ < text_.size()) {
      if (text_[pos_] == ')') throw ParseError("unbalanced parentheses: unexpected ')'", pos_);
      throw ParseError("trailing tokens", pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+'))
        lhs = make_binary(Kind::add, lhs, product());
      else if (accept('-'))
        lhs = make_binary(Kind::sub, lhs, product());
      else
        return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make_binary(Kind::mul, lhs, unary());
      else if (accept('/'))
        lhs = make_binary(Kind::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Kind::neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("expected expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      const std::size_t open = pos_++;
      NodePtr inner = sum();
      if (!accept(')')) {
        skip_space();
        if (pos_ >= text_.size())
          throw ParseError("unbalanced parentheses: '(' at offset " + std::to_string(open) +
                               " is never closed",
                           pos_);
        throw ParseError("expected ')'", pos_);
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == ')') throw ParseError("unbalanced parentheses: unexpected ')'", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_ || !std::isfinite(v))
      throw ParseError("malformed number", start);
    return make_number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::pi;
      return n;
    }
    if (auto v = var_from_name(name)) {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::variable;
      n->var = *v;
      return n;
    }
    if (auto f = func_from_name(name)) {
      if (!accept('(')) throw ParseError("expected '(' after function " + std::string(name), pos_);
      NodePtr arg = sum();
      if (!accept(')')) {
        skip_space();
        throw ParseError("unbalanced parentheses in call to " + std::string(name), pos_);
      }
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::call;
      n->func = *f;
      n->lhs = std::move(arg);
      return n;
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* op) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + op);
  return v;
}

double eval_node(const Expression::Node& n, const Binding& b) {
  switch (n.kind) {
    case Kind::number:
      return n.value;
    case Kind::pi:
      return std::numbers::pi;
    case Kind::variable:
      return b.get(n.var);
    case Kind::neg:
      return -eval_node(*n.lhs, b);
    case Kind::add:
      return checked(eval_node(*n.lhs, b) + eval_node(*n.rhs, b), "+");
    case Kind::sub:
      return checked(eval_node(*n.lhs, b) - eval_node(*n.rhs, b), "-");
    case Kind::mul:
      return checked(eval_node(*n.lhs, b) * eval_node(*n.rhs, b), "*");
    case Kind::div: {
      const double num = eval_node(*n.lhs, b);
      const double den = eval_node(*n.rhs, b);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den, "/");
    }
    case Kind::pow: {
      const double base = eval_node(*n.lhs, b);
      const double ex = eval_node(*n.rhs, b);
      if (base == 0.0 && ex < 0.0) throw DomainError("zero raised to a negative power");
      if (base < 0.0 && std::trunc(ex) != ex)
        throw DomainError("negative base raised to a non-integer power");
      return checked(std::pow(base, ex), "^");
    }
    case Kind::call: {
      const double x = eval_node(*n.lhs, b);
      switch (n.func) {
        case Func::sin:
          return std::sin(x);
        case Func::cos:
          return std::cos(x);
        case Func::exp:
          return checked(std::exp(x), "exp");
        case Func::sqrt:
          if (x < 0.0) throw DomainError("sqrt of a negative value");
          return std::sqrt(x);
        case Func::abs:
          return std::abs(x);
      }
    }
  }
  throw DomainError("corrupt expression node");
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(const Expression::Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::number:
      out += format_number(n.value);
      return;
    case Kind::pi:
      out += "pi";
      return;
    case Kind::variable:
      out += var_name(n.var);
      return;
    case Kind::neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Kind::add:
      return binary(" + ");
    case Kind::sub:
      return binary(" - ");
    case Kind::mul:
      return binary(" * ");
    case Kind::div:
      return binary(" / ");
    case Kind::pow:
      return binary("^");
    case Kind::call:
      out += kFuncNames[static_cast<std::size_t>(n.func)];
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

bool same_tree(const Expression::Node& a, const Expression::Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::number:
      return a.value == b.value;
    case Kind::pi:
      return true;
    case Kind::variable:
      return a.var == b.var;
    case Kind::call:
      return a.func == b.func && same_tree(*a.lhs, *b.lhs);
    case Kind::neg:
      return same_tree(*a.lhs, *b.lhs);
    default:
      return same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
  }
}

std::uint8_t collect_vars(const Expression::Node& n) {
  std::uint8_t m = 0;
  if (n.kind == Kind::variable) m |= std::uint8_t(1u << static_cast<unsigned>(n.var));
  if (n.lhs) m |= collect_vars(*n.lhs);
  if (n.rhs) m |= collect_vars(*n.rhs);
  return m;
}

}  // namespace

std::optional<Var> var_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVarNames.size(); ++i)
    if (kVarNames[i] == name) return static_cast<Var>(i);
  return std::nullopt;
}

std::string_view var_name(Var v) { return kVarNames[static_cast<std::size_t>(v)]; }

Binding::Binding(std::initializer_list<std::pair<std::string_view, double>> values) {
  for (const auto& [name, value] : values) set(name, value);
}

Binding& Binding::set(std::string_view name, double value) {
  const auto v = var_from_name(name);
  if (!v) throw UnboundVariable("unknown variable '" + std::string(name) + "'");
  return set(*v, value);
}

double Binding::get(Var v) const {
  if (!bound(v)) throw UnboundVariable("unbound variable '" + std::string(var_name(v)) + "'");
  return values_[static_cast<std::size_t>(v)];
}

Expression::Expression() : root_(make_number(0.0)) {}

Expression Expression::constant(double value) { return Expression(make_number(value)); }

double Expression::eval(const Binding& b) const { return eval_node(*root_, b); }

std::string Expression::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

std::uint8_t Expression::free_variables() const { return collect_vars(*root_); }

bool operator==(const Expression& a, const Expression& b) {
  return a.root_ == b.root_ || same_tree(*a.root_, *b.root_);
}

Expression parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

double num_deriv(const Expression& e, Var var, const Binding& b, double h) {
  if (!(h > 0.0)) throw DomainError("num_deriv step must be positive");
  Binding probe = b;
  const double x0 = b.get(var);
  return richardson_derivative(
      [&](double x) {
        probe.set(var, x);
        return e.eval(probe);
      },
      x0, h);
}

}  // namespace reebpa
