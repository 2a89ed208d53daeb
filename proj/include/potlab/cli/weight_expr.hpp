#pragma once

#include <string>
#include <vector>

#include "potlab/core/functionals.hpp"

namespace potlab {

/// Parsed weight expression over x1..x3 and r = |x|.
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | atom ('^' ['-'] number)?
///   atom   := number | x1..x3 | r | '(' expr ')' | fn '(' expr ')'
///   fn     := log | exp | abs | sqrt | sin | cos
class WeightExpr {
 public:
  /// Throws SyntaxError with the offset of the first offending character.
  static WeightExpr parse(const std::string& text);

  double operator()(const Point& x) const;
  const std::string& text() const { return text_; }
  /// Highest coordinate index used (0 when only r or constants appear).
  int max_coordinate() const { return max_coord_; }
  WeightFunction function() const;

  enum class Op { num, coord, radius, add, sub, mul, div, pow, neg, log, exp, abs, sqrt, sin, cos };
  struct Node {
    Op op;
    double value = 0.0;  // number, exponent, or coordinate index
    int a = -1, b = -1;
  };

 private:
  double eval(int i, const Point& x) const;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int max_coord_ = 0;

  friend class WeightParser;
};

}  // namespace potlab
