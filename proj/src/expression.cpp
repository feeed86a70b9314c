#include "kschemo/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "kschemo/error.hpp"

namespace kschemo {

struct Expression::Node {
  enum class Op { number, variable, neg, add, sub, mul, div, pow, call1, call2 } op = Op::number;
  double value = 0.0;
  std::size_t index = 0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> vars) const {
    switch (op) {
      case Op::number: return value;
      case Op::variable: return vars[index];
      case Op::neg: return -lhs->eval(vars);
      case Op::add: return lhs->eval(vars) + rhs->eval(vars);
      case Op::sub: return lhs->eval(vars) - rhs->eval(vars);
      case Op::mul: return lhs->eval(vars) * rhs->eval(vars);
      case Op::div: return lhs->eval(vars) / rhs->eval(vars);
      case Op::pow: return std::pow(lhs->eval(vars), rhs->eval(vars));
      case Op::call1: return fn1(lhs->eval(vars));
      case Op::call2: return fn2(lhs->eval(vars), rhs->eval(vars));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

double fmin2(double a, double b) { return std::fmin(a, b); }
double fmax2(double a, double b) { return std::fmax(a, b); }
double pow2(double a, double b) { return std::pow(a, b); }
double exp1(double a) { return std::exp(a); }
double log1(double a) { return std::log(a); }
double sqrt1(double a) { return std::sqrt(a); }
double abs1(double a) { return std::abs(a); }
double tanh1(double a) { return std::tanh(a); }
double sin1(double a) { return std::sin(a); }
double cos1(double a) { return std::cos(a); }

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         const std::map<std::string, double>& consts)
      : s_(text), vars_(vars), consts_(consts) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(0, "expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + what);
  }

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

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Node::Op::add, n, term());
      } else if (accept('-')) {
        n = make(Node::Op::sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Node::Op::mul, n, unary());
      } else if (accept('/')) {
        n = make(Node::Op::div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      auto n = expr();
      expect(')');
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) fail("invalid number");
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (accept('(')) return call(name);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Node>();
        n->op = Node::Op::variable;
        n->index = i;
        return n;
      }
    }
    if (const auto it = consts_.find(name); it != consts_.end()) {
      auto n = std::make_shared<Node>();
      n->value = it->second;
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  NodePtr call(const std::string& name) {
    static const std::map<std::string, double (*)(double)> one{
        {"exp", exp1}, {"log", log1}, {"sqrt", sqrt1}, {"abs", abs1},
        {"tanh", tanh1}, {"sin", sin1}, {"cos", cos1}};
    static const std::map<std::string, double (*)(double, double)> two{
        {"min", fmin2}, {"max", fmax2}, {"pow", pow2}};
    if (const auto it = one.find(name); it != one.end()) {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::call1;
      n->fn1 = it->second;
      n->lhs = expr();
      expect(')');
      return n;
    }
    if (const auto it = two.find(name); it != two.end()) {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::call2;
      n->fn2 = it->second;
      n->lhs = expr();
      expect(',');
      n->rhs = expr();
      expect(')');
      return n;
    }
    fail("unknown function '" + name + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text, const std::vector<std::string>& variables,
                       const std::map<std::string, double>& constants)
    : text_(text), root_(Parser(text, variables, constants).parse()) {}

double Expression::operator()(std::span<const double> values) const { return root_->eval(values); }

bool Expression::is_zero() const { return root_->op == Node::Op::number && root_->value == 0.0; }

}  // namespace kschemo
