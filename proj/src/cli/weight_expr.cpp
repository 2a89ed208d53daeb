#include "potlab/cli/weight_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>

#include "potlab/core/errors.hpp"

namespace potlab {

class WeightParser {
 public:
  WeightParser(const std::string& s, WeightExpr& out) : s_(s), out_(out) {}

  int parse() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "expression");
    const int root = expr();
    skip();
    if (pos_ < s_.size()) throw SyntaxError(pos_, "operator or end of input");
    return root;
  }

 private:
  using Op = WeightExpr::Op;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  int node(Op op, double v = 0.0, int a = -1, int b = -1) {
    out_.nodes_.push_back({op, v, a, b});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) lhs = node(Op::add, 0.0, lhs, term());
      else if (accept('-')) lhs = node(Op::sub, 0.0, lhs, term());
      else return lhs;
    }
  }
  int term() {
    int lhs = factor();
    for (;;) {
      if (accept('*')) lhs = node(Op::mul, 0.0, lhs, factor());
      else if (accept('/')) lhs = node(Op::div, 0.0, lhs, factor());
      else return lhs;
    }
  }
  int factor() {
    if (accept('-')) return node(Op::neg, 0.0, factor());
    const int base = atom();
    if (!accept('^')) return base;
    skip();
    bool neg = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      neg = s_[pos_] == '-';
      ++pos_;
    }
    const double e = number("number after '^'");
    return node(Op::pow, neg ? -e : e, base);
  }
  double number(const char* what) {
    skip();
    const char* begin = s_.c_str() + pos_;
    if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      throw SyntaxError(pos_, what);
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw SyntaxError(pos_, what);
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  int atom() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return node(Op::num, number("number"));
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "r") return node(Op::radius);
      if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3') {
        const int k = name[1] - '1';
        out_.max_coord_ = std::max(out_.max_coord_, k + 1);
        return node(Op::coord, k);
      }
      static const std::pair<const char*, Op> fns[] = {{"log", Op::log}, {"exp", Op::exp},   {"abs", Op::abs},
                                                       {"sqrt", Op::sqrt}, {"sin", Op::sin}, {"cos", Op::cos}};
      for (const auto& [fname, op] : fns) {
        if (name == fname) {
          if (!accept('(')) throw SyntaxError(pos_, "'(' after " + name);
          const int arg = expr();
          if (!accept(')')) throw SyntaxError(pos_, "')'");
          return node(op, 0.0, arg);
        }
      }
      throw SyntaxError(start, "number, x1..x3, r, function or '('");
    }
    throw SyntaxError(pos_, "number, x1..x3, r, function or '('");
  }

  const std::string& s_;
  WeightExpr& out_;
  std::size_t pos_ = 0;
};

WeightExpr WeightExpr::parse(const std::string& text) {
  WeightExpr e;
  e.text_ = text;
  WeightParser p(e.text_, e);
  e.root_ = p.parse();
  return e;
}

double WeightExpr::eval(int i, const Point& x) const {
  const Node& n = nodes_[i];
  switch (n.op) {
    case Op::num: return n.value;
    case Op::coord: {
      const int k = static_cast<int>(n.value);
      return x[k];
    }
    case Op::radius: return x.norm();
    case Op::add: return eval(n.a, x) + eval(n.b, x);
    case Op::sub: return eval(n.a, x) - eval(n.b, x);
    case Op::mul: return eval(n.a, x) * eval(n.b, x);
    case Op::div: return eval(n.a, x) / eval(n.b, x);
    case Op::pow: {
      const double b = eval(n.a, x);
      if (n.value == 2.0) return b * b;
      return std::pow(b, n.value);
    }
    case Op::neg: return -eval(n.a, x);
    case Op::log: return std::log(eval(n.a, x));
    case Op::exp: return std::exp(eval(n.a, x));
    case Op::abs: return std::abs(eval(n.a, x));
    case Op::sqrt: return std::sqrt(eval(n.a, x));
    case Op::sin: return std::sin(eval(n.a, x));
    case Op::cos: return std::cos(eval(n.a, x));
  }
  return 0.0;
}

double WeightExpr::operator()(const Point& x) const { return eval(root_, x); }

WeightFunction WeightExpr::function() const {
  auto self = std::make_shared<const WeightExpr>(*this);
  return [self](const Point& x) { return (*self)(x); };
}

}  // namespace potlab
