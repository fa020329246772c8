#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graflow/expression.hpp"

using namespace graflow;

namespace {

double eval(const std::string& text, std::vector<double> x = {0.0}, std::vector<double> y = {0.0},
            double t = 0.0) {
  const Expression e =
      Expression::parse(text, static_cast<int>(x.size()), static_cast<int>(y.size()));
  return e.evaluate(x.data(), y.data(), t);
}

}  // namespace

TEST_CASE("arithmetic and precedence") {
  CHECK(eval("1+2*3") == doctest::Approx(7.0));
  CHECK(eval("(1+2)*3") == doctest::Approx(9.0));
  CHECK(eval("2-3-4") == doctest::Approx(-5.0));
  CHECK(eval("12/4/3") == doctest::Approx(1.0));
  CHECK(eval("-2*-3") == doctest::Approx(6.0));
  CHECK(eval("1e-3 + 2.5E2") == doctest::Approx(250.001));
}

TEST_CASE("functions, constants, variables") {
  CHECK(eval("sin(pi/2)") == doctest::Approx(1.0));
  CHECK(eval("cos(0)") == doctest::Approx(1.0));
  CHECK(eval("tan(pi/4)") == doctest::Approx(1.0));
  CHECK(eval("exp(log(5))") == doctest::Approx(5.0));
  CHECK(eval("pow(2, 10)") == doctest::Approx(1024.0));
  CHECK(eval("x1*2", {3.0}) == doctest::Approx(6.0));
  CHECK(eval("x1+x2", {1.0, 2.0}, {0.0}) == doctest::Approx(3.0));
  CHECK(eval("y1 - t", {0.0}, {5.0}, 2.0) == doctest::Approx(3.0));
  CHECK(eval("t - log(cos(x1))", {0.3}, {0.0}, -0.1) ==
        doctest::Approx(-0.1 - std::log(std::cos(0.3))));
}

TEST_CASE("parse errors carry a column") {
  auto column_of = [](const std::string& text) {
    try {
      Expression::parse(text, 2, 1);
    } catch (const ParseError& e) {
      return e.column;
    }
    return -1;
  };
  CHECK(column_of("1 + ") == 5);
  CHECK(column_of("1 + %") == 5);
  CHECK(column_of("foo(1)") == 1);
  CHECK(column_of("x3 + 1") == 1);   // out of range for k=2
  CHECK(column_of("y2") == 1);       // out of range for codim=1
  CHECK(column_of("(1+2") == 5);
  CHECK(column_of("pow(1)") == 6);   // missing second argument
  CHECK(column_of("1 2") == 3);      // trailing input
}

TEST_CASE("evaluation is deterministic") {
  const Expression e = Expression::parse("sin(x1)*exp(y1) + pow(t, 2)/3", 1, 1);
  double x = 0.37, y = -1.2;
  const double a = e.evaluate(&x, &y, 0.9);
  const double b = e.evaluate(&x, &y, 0.9);
  CHECK(a == b);
}
