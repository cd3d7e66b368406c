#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "reebpa/expr.hpp"

using namespace reebpa;

namespace {

double eval_at(std::string_view text, Binding b = {}) { return parse(text).eval(b); }

std::size_t parse_error_offset(std::string_view text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  FAIL("no parse error for " << text);
  return 0;
}

// Random well-formed source text over the full grammar.
std::string random_expression(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  const char* atoms[] = {"t", "r", "th", "x", "y", "pi", "2", "0.5", "3.25", "1e-3"};
  const char* funcs[] = {"sin", "cos", "exp", "sqrt", "abs"};
  const char* ops[] = {" + ", " - ", "*", "/", "^"};
  if (depth == 0) return atoms[pick(rng)];
  switch (pick(rng) % 5) {
    case 0: return atoms[pick(rng)];
    case 1: return std::string(funcs[pick(rng) % 5]) + "(" + random_expression(rng, depth - 1) + ")";
    case 2: return "-" + random_expression(rng, depth - 1);
    case 3: return "(" + random_expression(rng, depth - 1) + ")";
    default:
      return random_expression(rng, depth - 1) + ops[pick(rng) % 5] + random_expression(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("parse and evaluate the worked examples") {
  CHECK(eval_at("r^2", {{"r", 0.5}}) == 0.25);
  CHECK(eval_at("cos(2*pi*t)", {{"t", 0.5}}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(eval_at("sin(th)", {{"th", 0.0}}) == 0.0);
  CHECK(eval_at("2*x*y*(x^2-y^2)/(x^2+y^2)^(3/2)", {{"x", 1.0}, {"y", 0.0}}) == 0.0);
  CHECK(eval_at("exp(1)") == doctest::Approx(2.718281828459045).epsilon(1e-15));
}

TEST_CASE("precedence and associativity") {
  CHECK(eval_at("1+2*3") == 7.0);
  CHECK(eval_at("2^3^2") == 512.0);
  CHECK(eval_at("-2^2") == -4.0);
  CHECK(eval_at("2^-2") == 0.25);
  CHECK(eval_at("10-4-3") == 3.0);
  CHECK(eval_at("64/4/2") == 8.0);
  CHECK(eval_at("2*-3") == -6.0);
  CHECK(eval_at("  ( 1 +2 ) *3 ") == 9.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK(parse_error_offset("r +") == 3);
  CHECK(parse_error_offset("(r + 1") == 6);
  CHECK(parse_error_offset("r + 1)") == 5);
  CHECK(parse_error_offset("r r") == 2);
  CHECK(parse_error_offset("foo(r)") == 0);
  CHECK(parse_error_offset("2 * z") == 4);
  CHECK(parse_error_offset("") == 0);
  CHECK_THROWS_AS(parse("sin r"), ParseError);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval_at("r + 1"), UnboundVariable);
  CHECK_THROWS_AS(eval_at("sqrt(-1)"), DomainError);
  CHECK_THROWS_AS(eval_at("1/0"), DomainError);
  CHECK_THROWS_AS(eval_at("0^-1"), DomainError);
  CHECK_THROWS_AS(eval_at("(-2)^0.5"), DomainError);
  CHECK_THROWS_AS(eval_at("exp(1000)"), DomainError);
  CHECK(eval_at("(-2)^3") == -8.0);
  CHECK(eval_at("abs(-3)") == 3.0);
}

TEST_CASE("free variables") {
  const Expression e = parse("r*cos(th) + 2");
  CHECK(e.free_variables() == ((1u << 1) | (1u << 2)));
  CHECK_FALSE(e.is_constant());
  CHECK(parse("2*pi").is_constant());
}

TEST_CASE("printing is fully parenthesised and reparses to the same tree") {
  CHECK(parse("1+2*3").to_string() == "(1 + (2 * 3))");
  CHECK(parse("2^3^2").to_string() == "(2^(3^2))");
  CHECK(parse("-x").to_string() == "(-x)");
  CHECK(parse("sqrt(r)").to_string() == "sqrt(r)");

  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const std::string text = random_expression(rng, 4);
    CAPTURE(text);
    const Expression e = parse(text);
    const Expression again = parse(e.to_string());
    CHECK(again == e);
    CHECK(again.to_string() == e.to_string());
  }
}

TEST_CASE("num_deriv examples") {
  CHECK(num_deriv(parse("r^2"), Var::r, {{"r", 1.0}}, 1e-4) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(num_deriv(parse("cos(th)"), Var::th, {{"th", 0.0}}, 1e-4)) < 1e-8);
  CHECK(num_deriv(parse("cos(2*pi*t)"), Var::t, {{"t", 0.25}}, 1e-4) ==
        doctest::Approx(-2 * std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("num_deriv is exact on cubics up to rounding") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), point(-2.0, 2.0), logh(-5.0, -3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const double x = point(rng), h = std::pow(10.0, logh(rng));
    const std::string text = std::to_string(a) + "*y^3 + " + std::to_string(b) + "*y^2 + " + std::to_string(c) +
                             "*y + " + std::to_string(d);
    const Expression e = parse(text);
    // Coefficients as printed, so the oracle differentiates the same polynomial.
    const double A = std::stod(std::to_string(a)), B = std::stod(std::to_string(b)),
                 C = std::stod(std::to_string(c));
    const double want = 3 * A * x * x + 2 * B * x + C;
    const double got = num_deriv(e, Var::y, {{"y", x}}, h);
    CAPTURE(text);
    CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("num_deriv reports domain errors inside the stencil") {
  CHECK_THROWS_AS(num_deriv(parse("sqrt(r)"), Var::r, {{"r", 0.0}}, 1e-4), DomainError);
}
