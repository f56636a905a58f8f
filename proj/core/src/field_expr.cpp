#include "spdebridge/field_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>

namespace spdebridge {

struct FieldExpr::Node {
  enum class Op { kConstant, kVariable, kAdd, kSub, kMul, kDiv, kPow, kNeg, kCall };
  Op op = Op::kConstant;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double xi) const {
    switch (op) {
      case Op::kConstant: return value;
      case Op::kVariable: return xi;
      case Op::kAdd: return lhs->eval(xi) + rhs->eval(xi);
      case Op::kSub: return lhs->eval(xi) - rhs->eval(xi);
      case Op::kMul: return lhs->eval(xi) * rhs->eval(xi);
      case Op::kDiv: return lhs->eval(xi) / rhs->eval(xi);
      case Op::kPow: return std::pow(lhs->eval(xi), rhs->eval(xi));
      case Op::kNeg: return -lhs->eval(xi);
      case Op::kCall: return fn(lhs->eval(xi));
    }
    return 0.0;
  }
};

namespace {

using Node = FieldExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kConstant;
  n->value = v;
  return n;
}

NodePtr make_binary(Node::Op op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

struct Parser {
  const std::string& text;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression error at position " + std::to_string(pos) +
                                ": " + what);
  }

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool consume(char c) {
    skip_space();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  // expression := term (('+' | '-') term)*
  NodePtr expression() {
    NodePtr node = term();
    while (true) {
      if (consume('+')) node = make_binary(Node::Op::kAdd, node, term());
      else if (consume('-')) node = make_binary(Node::Op::kSub, node, term());
      else return node;
    }
  }

  // term := factor (('*' | '/') factor)*
  NodePtr term() {
    NodePtr node = factor();
    while (true) {
      if (consume('*')) node = make_binary(Node::Op::kMul, node, factor());
      else if (consume('/')) node = make_binary(Node::Op::kDiv, node, factor());
      else return node;
    }
  }

  // factor := ('-' | '+') factor | power
  // Unary minus binds looser than '^', so -x^2 reads -(x^2).
  NodePtr factor() {
    if (consume('-')) {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::kNeg;
      n->lhs = factor();
      return n;
    }
    (void)consume('+');
    return power();
  }

  // power := primary ('^' factor)?   (right associative; exponents may carry
  // their own sign, as in 2^-3)
  NodePtr power() {
    NodePtr base = primary();
    if (consume('^')) return make_binary(Node::Op::kPow, base, factor());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos >= text.size()) fail("unexpected end of expression");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = expression();
      if (!consume(')')) fail("missing closing parenthesis");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos += static_cast<size_t>(end - begin);
    return make_constant(v);
  }

  NodePtr identifier() {
    const size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    const std::string name = text.substr(start, pos - start);
    if (name == "xi" || name == "x") {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::kVariable;
      return n;
    }
    if (name == "pi") return make_constant(3.14159265358979323846264338328);

    static const struct { const char* name; double (*fn)(double); } kFunctions[] = {
        {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
        {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
        {"abs", std::fabs},  {"sinh", std::sinh}, {"cosh", std::cosh},
        {"tanh", std::tanh},
    };
    for (const auto& entry : kFunctions) {
      if (name == entry.name) {
        if (!consume('(')) fail("function '" + name + "' needs parentheses");
        NodePtr arg = expression();
        if (!consume(')')) fail("missing closing parenthesis");
        auto n = std::make_shared<Node>();
        n->op = Node::Op::kCall;
        n->fn = entry.fn;
        n->lhs = std::move(arg);
        return n;
      }
    }
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

FieldExpr::FieldExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

FieldExpr FieldExpr::parse(const std::string& text) {
  Parser parser{text};
  NodePtr root = parser.expression();
  parser.skip_space();
  if (parser.pos != text.size()) parser.fail("trailing input");
  return FieldExpr(std::move(root));
}

double FieldExpr::operator()(double xi) const { return root_->eval(xi); }

Eigen::VectorXd FieldExpr::eval(const Eigen::VectorXd& points) const {
  Eigen::VectorXd out(points.size());
  for (Eigen::Index i = 0; i < points.size(); ++i) out[i] = root_->eval(points[i]);
  return out;
}

}  // namespace spdebridge
