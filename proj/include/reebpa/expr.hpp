#pragma once

// Scalar expressions over the chart variables t, r, th, x, y.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'pi' | variable | func '(' sum ')' | '(' sum ')'
// with func in {sin, cos, exp, sqrt, abs}.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "reebpa/errors.hpp"

namespace reebpa {

enum class Var : std::uint8_t { t = 0, r, th, x, y };
inline constexpr std::size_t kVarCount = 5;

std::optional<Var> var_from_name(std::string_view name);
std::string_view var_name(Var v);

/// Values for the free variables of an expression.
class Binding {
 public:
  Binding() = default;
  Binding(std::initializer_list<std::pair<std::string_view, double>> values);

  Binding& set(Var v, double value) {
    values_[static_cast<std::size_t>(v)] = value;
    mask_ |= bit(v);
    return *this;
  }
  Binding& set(std::string_view name, double value);

  bool bound(Var v) const { return (mask_ & bit(v)) != 0; }
  double get(Var v) const;
  std::uint8_t mask() const { return mask_; }

 private:
  static constexpr std::uint8_t bit(Var v) { return std::uint8_t(1u << static_cast<unsigned>(v)); }
  std::array<double, kVarCount> values_{};
  std::uint8_t mask_ = 0;
};

/// Immutable expression tree. Copies share the tree.
class Expression {
 public:
  struct Node;

  /// The literal 0.
  Expression();
  static Expression constant(double value);

  double eval(const Binding& b) const;

  /// Fully parenthesised text; parse(to_string()) reproduces the tree.
  std::string to_string() const;

  /// Bit mask over Var of the variables that occur in the tree.
  std::uint8_t free_variables() const;
  bool is_constant() const { return free_variables() == 0; }

  friend bool operator==(const Expression& a, const Expression& b);

  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  const Node& root() const { return *root_; }

 private:
  std::shared_ptr<const Node> root_;
};

Expression parse(std::string_view text);

inline double eval(const Expression& e, const Binding& b) { return e.eval(b); }

/// Central difference with one Richardson step:
///   D(h) = (f(x+h) - f(x-h)) / 2h,   result = (4 D(h/2) - D(h)) / 3.
template <class F>
double richardson_derivative(F&& f, double x, double h) {
  const double d_full = (f(x + h) - f(x - h)) / (2.0 * h);
  const double half = 0.5 * h;
  const double d_half = (f(x + half) - f(x - half)) / (2.0 * half);
  return (4.0 * d_half - d_full) / 3.0;
}

/// Derivative of `e` with respect to `var` at the point `b`.
double num_deriv(const Expression& e, Var var, const Binding& b, double h);

}  // namespace reebpa
