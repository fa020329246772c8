#pragma once

#include <string>
#include <vector>

#include "graflow/common.hpp"

namespace graflow {

/// Minimal arithmetic expression over the variables x1..xk (base plane
/// coordinates), y1..y{codim} (normal coordinates), and t. Supported:
/// + - * /, unary minus, pow(a,b), sin, cos, tan, log, exp, numeric
/// literals, and pi. Parsed once into a flat node list; evaluation is a
/// deterministic tree walk with no runtime code generation.
class Expression {
 public:
  Expression() = default;

  /// Throws ParseError (1-based column) on malformed input or unknown names.
  static Expression parse(const std::string& text, int k, int codim);

  double evaluate(const double* x, const double* y, double t) const;
  const std::string& text() const { return text_; }
  bool empty() const { return nodes_.empty(); }

 private:
  enum class Op {
    kConst, kVarX, kVarY, kVarT,
    kAdd, kSub, kMul, kDiv, kNeg,
    kSin, kCos, kTan, kLog, kExp, kPow,
  };
  struct Node {
    Op op;
    double value = 0.0;  // kConst
    int index = 0;       // kVarX/kVarY
    int lhs = -1, rhs = -1;
  };

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;

  friend class ExpressionParser;
};

}  // namespace graflow
