#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kschemo {

/// Compiled arithmetic expression over named variables, for user-supplied
/// kinetics and coefficients in run configurations.
///
/// Grammar: numbers, variables, named constants, + - * / ^ (right-assoc),
/// unary minus, parentheses, and the functions exp log sqrt abs tanh sin cos
/// (one argument) and min max pow (two arguments).
class Expression {
 public:
  /// Throws ParseError (column in the message, line 0) on bad syntax or an
  /// unknown identifier.
  Expression(const std::string& text, const std::vector<std::string>& variables,
             const std::map<std::string, double>& constants = {});

  /// `values[i]` binds `variables[i]`.
  double operator()(std::span<const double> values) const;

  const std::string& text() const { return text_; }
  /// True if the expression is a literal 0.
  bool is_zero() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace kschemo
