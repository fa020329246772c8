#include "graflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace graflow {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, int k, int codim)
      : text_(text), k_(k), codim_(codim) {}

  Expression run() {
    Expression e;
    e.text_ = text_;
    expr_ = &e;
    skip_ws();
    e.root_ = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression error: " + msg, 1, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add_node(Expression::Node n) {
    expr_->nodes_.push_back(n);
    return static_cast<int>(expr_->nodes_.size()) - 1;
  }

  int parse_sum() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) lhs = add_node({Op::kAdd, 0, 0, lhs, parse_term()});
      else if (eat('-')) lhs = add_node({Op::kSub, 0, 0, lhs, parse_term()});
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (eat('*')) lhs = add_node({Op::kMul, 0, 0, lhs, parse_unary()});
      else if (eat('/')) lhs = add_node({Op::kDiv, 0, 0, lhs, parse_unary()});
      else return lhs;
    }
  }

  int parse_unary() {
    if (eat('-')) return add_node({Op::kNeg, 0, 0, parse_unary(), -1});
    return parse_primary();
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_sum();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return add_node({Op::kConst, v, 0, -1, -1});
  }

  int parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    if (name == "pi") return add_node({Op::kConst, M_PI, 0, -1, -1});
    if (name == "t") return add_node({Op::kVarT, 0, 0, -1, -1});
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        const int idx = std::atoi(name.c_str() + 1);
        const int limit = name[0] == 'x' ? k_ : codim_;
        if (idx < 1 || idx > limit) {
          pos_ = start;
          fail("variable '" + name + "' out of range for this configuration");
        }
        return add_node({name[0] == 'x' ? Op::kVarX : Op::kVarY, 0, idx - 1, -1, -1});
      }
    }

    static const struct { const char* name; Op op; int arity; } kFns[] = {
        {"sin", Op::kSin, 1}, {"cos", Op::kCos, 1}, {"tan", Op::kTan, 1},
        {"log", Op::kLog, 1}, {"exp", Op::kExp, 1}, {"pow", Op::kPow, 2},
    };
    for (const auto& fn : kFns) {
      if (name == fn.name) {
        if (!eat('(')) fail(std::string("expected '(' after ") + fn.name);
        const int a = parse_sum();
        int b = -1;
        if (fn.arity == 2) {
          if (!eat(',')) fail("pow takes two arguments");
          b = parse_sum();
        }
        if (!eat(')')) fail("missing ')'");
        return add_node({fn.op, 0, 0, a, b});
      }
    }
    pos_ = start;
    fail("unknown name '" + name + "'");
  }

  const std::string& text_;
  int k_;
  int codim_;
  std::size_t pos_ = 0;
  Expression* expr_ = nullptr;
};

Expression Expression::parse(const std::string& text, int k, int codim) {
  return ExpressionParser(text, k, codim).run();
}

double Expression::evaluate(const double* x, const double* y, double t) const {
  if (root_ < 0) throw std::runtime_error("evaluating empty expression");
  // Nodes are appended children-first, so a single forward sweep evaluates
  // the whole tree.
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::kConst: v[i] = n.value; break;
      case Op::kVarX: v[i] = x[n.index]; break;
      case Op::kVarY: v[i] = y[n.index]; break;
      case Op::kVarT: v[i] = t; break;
      case Op::kAdd: v[i] = v[n.lhs] + v[n.rhs]; break;
      case Op::kSub: v[i] = v[n.lhs] - v[n.rhs]; break;
      case Op::kMul: v[i] = v[n.lhs] * v[n.rhs]; break;
      case Op::kDiv: v[i] = v[n.lhs] / v[n.rhs]; break;
      case Op::kNeg: v[i] = -v[n.lhs]; break;
      case Op::kSin: v[i] = std::sin(v[n.lhs]); break;
      case Op::kCos: v[i] = std::cos(v[n.lhs]); break;
      case Op::kTan: v[i] = std::tan(v[n.lhs]); break;
      case Op::kLog: v[i] = std::log(v[n.lhs]); break;
      case Op::kExp: v[i] = std::exp(v[n.lhs]); break;
      case Op::kPow: v[i] = std::pow(v[n.lhs], v[n.rhs]); break;
    }
  }
  return v[root_];
}

}  // namespace graflow
