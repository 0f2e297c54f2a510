#include "ivt/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ivt {
namespace detail {

enum class Op { lit, var_t, var_s, var_x, add, sub, mul, div, pow, neg, call };
enum class Fn { sin, cos, exp, ln, abs, sqrt, min, max };

struct ExprNode {
  Op op = Op::lit;
  double value = 0.0;
  int index = 0;  // x index, 0-based
  Fn fn = Fn::sin;
  std::shared_ptr<const ExprNode> a, b;
  SourcePos pos;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct Token {
  enum class Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };
  Kind kind;
  double number = 0.0;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    Token tok;
    tok.pos = {line_, col_};
    if (i_ >= src_.size()) {
      tok.kind = Token::Kind::end;
      return tok;
    }
    const char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident();
    advance();
    switch (c) {
      case '+': tok.kind = Token::Kind::plus; return tok;
      case '-': tok.kind = Token::Kind::minus; return tok;
      case '*': tok.kind = Token::Kind::star; return tok;
      case '/': tok.kind = Token::Kind::slash; return tok;
      case '^': tok.kind = Token::Kind::caret; return tok;
      case '(': tok.kind = Token::Kind::lparen; return tok;
      case ')': tok.kind = Token::Kind::rparen; return tok;
      case ',': tok.kind = Token::Kind::comma; return tok;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", tok.pos);
    }
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_ws() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
  }

  Token lex_number() {
    Token tok;
    tok.pos = {line_, col_};
    tok.kind = Token::Kind::number;
    const size_t start = i_;
    while (i_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[i_])) ||
                                src_[i_] == '.'))
      advance();
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) advance();
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
    }
    const std::string text(src_.substr(start, i_ - start));
    try {
      tok.number = std::stod(text);
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + text + "'", tok.pos);
    }
    return tok;
  }

  Token lex_ident() {
    Token tok;
    tok.pos = {line_, col_};
    tok.kind = Token::Kind::ident;
    const size_t start = i_;
    while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) ||
                                src_[i_] == '_'))
      advance();
    tok.text = std::string(src_.substr(start, i_ - start));
    return tok;
  }

  std::string_view src_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, int n) : lexer_(src), n_(n) { cur_ = lexer_.next(); }

  NodePtr parse() {
    NodePtr e = expression();
    if (cur_.kind != Token::Kind::end) throw ParseError("trailing input", cur_.pos);
    return e;
  }

 private:
  void bump() { cur_ = lexer_.next(); }

  bool accept(Token::Kind k) {
    if (cur_.kind != k) return false;
    bump();
    return true;
  }

  void expect(Token::Kind k, const char* what) {
    if (cur_.kind != k) throw ParseError(std::string("expected ") + what, cur_.pos);
    bump();
  }

  std::shared_ptr<ExprNode> make(Op op, SourcePos pos, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto node = std::make_shared<ExprNode>();
    node->op = op;
    node->pos = pos;
    node->a = std::move(a);
    node->b = std::move(b);
    return node;
  }

  NodePtr expression() {
    NodePtr e = term();
    while (cur_.kind == Token::Kind::plus || cur_.kind == Token::Kind::minus) {
      const auto pos = cur_.pos;
      const bool add = cur_.kind == Token::Kind::plus;
      bump();
      e = make(add ? Op::add : Op::sub, pos, e, term());
    }
    return e;
  }

  NodePtr term() {
    NodePtr e = unary();
    while (cur_.kind == Token::Kind::star || cur_.kind == Token::Kind::slash) {
      const auto pos = cur_.pos;
      const bool mul = cur_.kind == Token::Kind::star;
      bump();
      e = make(mul ? Op::mul : Op::div, pos, e, unary());
    }
    return e;
  }

  NodePtr unary() {
    if (cur_.kind == Token::Kind::minus) {
      const auto pos = cur_.pos;
      bump();
      return make(Op::neg, pos, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (cur_.kind == Token::Kind::caret) {
      const auto pos = cur_.pos;
      bump();
      return make(Op::pow, pos, base, unary());  // right associative
    }
    return base;
  }

  NodePtr primary() {
    const Token tok = cur_;
    if (accept(Token::Kind::number)) {
      auto node = make(Op::lit, tok.pos);
      node->value = tok.number;
      return node;
    }
    if (cur_.kind == Token::Kind::ident) {
      bump();
      return ident(tok);
    }
    if (accept(Token::Kind::lparen)) {
      NodePtr e = expression();
      expect(Token::Kind::rparen, "')'");
      return e;
    }
    throw ParseError("expected a value", tok.pos);
  }

  NodePtr ident(const Token& tok) {
    const std::string& name = tok.text;
    if (name == "t") return make(Op::var_t, tok.pos);
    if (name == "s") return make(Op::var_s, tok.pos);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        const int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > n_)
          throw ParseError("variable " + name + " is out of range for dimension " +
                               std::to_string(n_),
                           tok.pos);
        auto node = make(Op::var_x, tok.pos);
        node->index = idx - 1;
        return node;
      }
    }
    static const std::pair<const char*, Fn> fns[] = {
        {"sin", Fn::sin}, {"cos", Fn::cos}, {"exp", Fn::exp},   {"ln", Fn::ln},
        {"abs", Fn::abs}, {"sqrt", Fn::sqrt}, {"min", Fn::min}, {"max", Fn::max}};
    for (const auto& [fname, fn] : fns) {
      if (name == fname) {
        expect(Token::Kind::lparen, "'(' after function name");
        NodePtr a = expression();
        NodePtr b;
        const bool binary = fn == Fn::min || fn == Fn::max;
        if (binary) {
          if (!accept(Token::Kind::comma))
            throw ParseError(name + " takes two arguments", cur_.pos);
          b = expression();
        } else if (cur_.kind == Token::Kind::comma) {
          throw ParseError(name + " takes one argument", cur_.pos);
        }
        expect(Token::Kind::rparen, "')'");
        auto node = make(Op::call, tok.pos, a, b);
        node->fn = fn;
        return node;
      }
    }
    throw ParseError("unknown identifier '" + name + "'", tok.pos);
  }

  Lexer lexer_;
  Token cur_;
  int n_;
};

struct EvalCtx {
  double t;
  const Eigen::VectorXd* x;
  const double* s;
};

double check_finite(double v, const ExprNode& node) {
  if (!std::isfinite(v)) throw EvalError("non-finite result", node.pos);
  return v;
}

double eval_node(const ExprNode& node, const EvalCtx& ctx) {
  switch (node.op) {
    case Op::lit: return node.value;
    case Op::var_t: return ctx.t;
    case Op::var_s:
      if (!ctx.s) throw ContractError("fast-time variable outside jump context");
      return *ctx.s;
    case Op::var_x:
      if (!ctx.x || node.index >= ctx.x->size())
        throw ContractError("state vector shorter than the expression dimension");
      return (*ctx.x)(node.index);
    case Op::add: return check_finite(eval_node(*node.a, ctx) + eval_node(*node.b, ctx), node);
    case Op::sub: return check_finite(eval_node(*node.a, ctx) - eval_node(*node.b, ctx), node);
    case Op::mul: return check_finite(eval_node(*node.a, ctx) * eval_node(*node.b, ctx), node);
    case Op::div: {
      const double num = eval_node(*node.a, ctx);
      const double den = eval_node(*node.b, ctx);
      if (den == 0.0) throw EvalError("division by zero", node.pos);
      return check_finite(num / den, node);
    }
    case Op::pow: {
      const double base = eval_node(*node.a, ctx);
      const double e = eval_node(*node.b, ctx);
      if (base < 0.0 && e != std::floor(e))
        throw EvalError("negative base with non-integer exponent", node.pos);
      if (base == 0.0 && e < 0.0) throw EvalError("zero base with negative exponent", node.pos);
      return check_finite(std::pow(base, e), node);
    }
    case Op::neg: return -eval_node(*node.a, ctx);
    case Op::call: {
      const double a = eval_node(*node.a, ctx);
      switch (node.fn) {
        case Fn::sin: return std::sin(a);
        case Fn::cos: return std::cos(a);
        case Fn::exp: return check_finite(std::exp(a), node);
        case Fn::ln:
          if (a <= 0.0) throw EvalError("ln of a nonpositive value", node.pos);
          return std::log(a);
        case Fn::abs: return std::abs(a);
        case Fn::sqrt:
          if (a < 0.0) throw EvalError("sqrt of a negative value", node.pos);
          return std::sqrt(a);
        case Fn::min: return std::min(a, eval_node(*node.b, ctx));
        case Fn::max: return std::max(a, eval_node(*node.b, ctx));
      }
      break;
    }
  }
  throw EvalError("corrupt expression node");
}

void scan_uses(const ExprNode& node, bool& uses_t, bool& uses_s, bool& uses_x) {
  switch (node.op) {
    case Op::var_t: uses_t = true; break;
    case Op::var_s: uses_s = true; break;
    case Op::var_x: uses_x = true; break;
    default: break;
  }
  if (node.a) scan_uses(*node.a, uses_t, uses_s, uses_x);
  if (node.b) scan_uses(*node.b, uses_t, uses_s, uses_x);
}

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::sin: return "sin";
    case Fn::cos: return "cos";
    case Fn::exp: return "exp";
    case Fn::ln: return "ln";
    case Fn::abs: return "abs";
    case Fn::sqrt: return "sqrt";
    case Fn::min: return "min";
    case Fn::max: return "max";
  }
  return "?";
}

void print_node(const ExprNode& node, std::string& out) {
  switch (node.op) {
    case Op::lit: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", node.value);
      out += buf;
      return;
    }
    case Op::var_t: out += 't'; return;
    case Op::var_s: out += 's'; return;
    case Op::var_x:
      out += 'x';
      out += std::to_string(node.index + 1);
      return;
    case Op::neg:
      out += "(-";
      print_node(*node.a, out);
      out += ')';
      return;
    case Op::call:
      out += fn_name(node.fn);
      out += '(';
      print_node(*node.a, out);
      if (node.b) {
        out += ", ";
        print_node(*node.b, out);
      }
      out += ')';
      return;
    default: {
      const char* op = node.op == Op::add   ? " + "
                       : node.op == Op::sub ? " - "
                       : node.op == Op::mul ? " * "
                       : node.op == Op::div ? " / "
                                            : "^";
      out += '(';
      print_node(*node.a, out);
      out += op;
      print_node(*node.b, out);
      out += ')';
      return;
    }
  }
}

bool same_node(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::lit && a.value != b.value) return false;
  if (a.op == Op::var_x && a.index != b.index) return false;
  if (a.op == Op::call && a.fn != b.fn) return false;
  if (static_cast<bool>(a.a) != static_cast<bool>(b.a)) return false;
  if (static_cast<bool>(a.b) != static_cast<bool>(b.b)) return false;
  if (a.a && !same_node(*a.a, *b.a)) return false;
  if (a.b && !same_node(*a.b, *b.b)) return false;
  return true;
}

}  // namespace
}  // namespace detail

Expr Expr::parse(std::string_view source, int n) {
  if (source.empty()) throw ParseError("empty expression", {1, 1});
  detail::Parser parser(source, n);
  Expr expr;
  expr.root_ = parser.parse();
  expr.n_ = n;
  detail::scan_uses(*expr.root_, expr.uses_t_, expr.uses_s_, expr.uses_x_);
  return expr;
}

double Expr::eval(double t, const Eigen::VectorXd& x) const {
  if (!root_) throw ContractError("evaluating an empty expression");
  detail::EvalCtx ctx{t, &x, nullptr};
  return detail::eval_node(*root_, ctx);
}

double Expr::eval(double t, const Eigen::VectorXd& x, double s) const {
  if (!root_) throw ContractError("evaluating an empty expression");
  detail::EvalCtx ctx{t, &x, &s};
  return detail::eval_node(*root_, ctx);
}

Eigen::VectorXd Expr::grad(double t, const Eigen::VectorXd& x, double h) const {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = eval(t, probe);
    probe(i) = x(i) - h;
    const double fm = eval(t, probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::string Expr::print() const {
  if (!root_) return "";
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

bool Expr::same_structure(const Expr& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return detail::same_node(*root_, *other.root_);
}

}  // namespace ivt
