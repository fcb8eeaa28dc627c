#include "hlbvp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace hlbvp::expr {

namespace {

enum class Op : unsigned char {
  push_const,
  push_var,
  add,
  sub,
  mul,
  div,
  pow,
  neg,
  fsin,
  fcos,
  ftan,
  fexp,
  flog,
  fsqrt,
  fabs_,
  fatan,
  fmin_,
  fmax_,
};

struct Node {
  Op op;
  double number = 0.0;       // push_const
  std::size_t var_index = 0; // push_var
  std::string var_name;
  std::vector<Node> children;
};

struct Instr {
  Op op;
  double number;
  std::size_t var_index;
  const Node* node;  // for error reporting
};

int precedence_of(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::neg:
      return 3;
    case Op::pow:
      return 4;
    default:
      return 5;  // atoms and calls never need parentheses
  }
}

const char* call_name(Op op) {
  switch (op) {
    case Op::fsin: return "sin";
    case Op::fcos: return "cos";
    case Op::ftan: return "tan";
    case Op::fexp: return "exp";
    case Op::flog: return "log";
    case Op::fsqrt: return "sqrt";
    case Op::fabs_: return "abs";
    case Op::fatan: return "atan";
    case Op::fmin_: return "min";
    case Op::fmax_: return "max";
    default: return nullptr;
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::push_const: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      if (n.number < 0) {  // literals are non-negative; keep sign explicit
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case Op::push_var:
      out += n.var_name;
      return;
    case Op::neg: {
      out += '-';
      const bool paren = precedence_of(n.children[0].op) < precedence_of(Op::neg);
      if (paren) out += '(';
      print_node(n.children[0], out);
      if (paren) out += ')';
      return;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: {
      const int p = precedence_of(n.op);
      const int pl = precedence_of(n.children[0].op);
      const int pr = precedence_of(n.children[1].op);
      // left-associative chains keep the left child bare at equal
      // precedence; ^ is right-associative so the rule flips
      const bool lparen = (n.op == Op::pow) ? (pl <= p) : (pl < p);
      const bool rparen = (n.op == Op::pow) ? (pr < p) : (pr <= p);
      if (lparen) out += '(';
      print_node(n.children[0], out);
      if (lparen) out += ')';
      switch (n.op) {
        case Op::add: out += '+'; break;
        case Op::sub: out += '-'; break;
        case Op::mul: out += '*'; break;
        case Op::div: out += '/'; break;
        default: out += '^'; break;
      }
      if (rparen) out += '(';
      print_node(n.children[1], out);
      if (rparen) out += ')';
      return;
    }
    default: {
      out += call_name(n.op);
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ',';
        print_node(n.children[i], out);
      }
      out += ')';
      return;
    }
  }
}

std::string print_node(const Node& n) {
  std::string out;
  print_node(n, out);
  return out;
}

struct Tokenizer {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

struct Parser {
  Tokenizer tok;
  const std::vector<std::string>& vars;

  Node parse_expression() { return parse_sum(); }

  Node parse_sum() {
    Node left = parse_product();
    for (;;) {
      if (tok.consume('+')) {
        left = binary(Op::add, std::move(left), parse_product());
      } else if (tok.consume('-')) {
        left = binary(Op::sub, std::move(left), parse_product());
      } else {
        return left;
      }
    }
  }

  Node parse_product() {
    Node left = parse_unary();
    for (;;) {
      if (tok.consume('*')) {
        left = binary(Op::mul, std::move(left), parse_unary());
      } else if (tok.consume('/')) {
        left = binary(Op::div, std::move(left), parse_unary());
      } else {
        return left;
      }
    }
  }

  Node parse_unary() {
    if (tok.consume('-')) {
      Node n;
      n.op = Op::neg;
      n.children.push_back(parse_unary());
      return n;
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_atom();
    if (tok.consume('^')) {
      // right-associative; exponent may carry a unary minus
      return binary(Op::pow, std::move(base), parse_unary());
    }
    return base;
  }

  Node parse_atom() {
    const char c = tok.peek();
    if (c == '(') {
      ++tok.pos;
      Node inner = parse_expression();
      if (!tok.consume(')')) throw ParseError("expected ')'", tok.pos);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    if (c == '\0') throw ParseError("unexpected end of input", tok.pos);
    throw ParseError(std::string("unexpected character '") + c + "'", tok.pos);
  }

  Node parse_number() {
    tok.skip_ws();
    const std::size_t start = tok.pos;
    auto digits = [&] {
      while (tok.pos < tok.src.size() && std::isdigit(static_cast<unsigned char>(tok.src[tok.pos]))) ++tok.pos;
    };
    digits();
    if (tok.pos < tok.src.size() && tok.src[tok.pos] == '.') {
      ++tok.pos;
      digits();
    }
    if (tok.pos < tok.src.size() && (tok.src[tok.pos] == 'e' || tok.src[tok.pos] == 'E')) {
      const std::size_t mark = tok.pos;
      ++tok.pos;
      if (tok.pos < tok.src.size() && (tok.src[tok.pos] == '+' || tok.src[tok.pos] == '-')) ++tok.pos;
      if (tok.pos < tok.src.size() && std::isdigit(static_cast<unsigned char>(tok.src[tok.pos]))) {
        digits();
      } else {
        tok.pos = mark;  // 'e' belongs to something else, e.g. "2e" is "2 * e"? no: reject below
      }
    }
    const std::string text(tok.src.substr(start, tok.pos - start));
    if (text.empty() || text == ".") throw ParseError("malformed number", start);
    Node n;
    n.op = Op::push_const;
    n.number = std::strtod(text.c_str(), nullptr);
    return n;
  }

  Node parse_identifier() {
    tok.skip_ws();
    const std::size_t start = tok.pos;
    while (tok.pos < tok.src.size() &&
           (std::isalpha(static_cast<unsigned char>(tok.src[tok.pos])) ||
            (tok.pos > start && std::isdigit(static_cast<unsigned char>(tok.src[tok.pos])))))
      ++tok.pos;
    const std::string name(tok.src.substr(start, tok.pos - start));

    if (tok.peek() == '(') return parse_call(name, start);

    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i] == name) {
        Node n;
        n.op = Op::push_var;
        n.var_index = i;
        n.var_name = name;
        return n;
      }
    }
    if (name == "pi") {
      Node n;
      n.op = Op::push_const;
      n.number = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      Node n;
      n.op = Op::push_const;
      n.number = std::numbers::e;
      return n;
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  Node parse_call(const std::string& name, std::size_t start) {
    Op op;
    std::size_t arity;
    if (name == "sin") { op = Op::fsin; arity = 1; }
    else if (name == "cos") { op = Op::fcos; arity = 1; }
    else if (name == "tan") { op = Op::ftan; arity = 1; }
    else if (name == "exp") { op = Op::fexp; arity = 1; }
    else if (name == "log") { op = Op::flog; arity = 1; }
    else if (name == "sqrt") { op = Op::fsqrt; arity = 1; }
    else if (name == "abs") { op = Op::fabs_; arity = 1; }
    else if (name == "atan") { op = Op::fatan; arity = 1; }
    else if (name == "min") { op = Op::fmin_; arity = 2; }
    else if (name == "max") { op = Op::fmax_; arity = 2; }
    else throw ParseError("unknown function '" + name + "'", start);

    if (!tok.consume('(')) throw ParseError("expected '(' after function name", tok.pos);
    Node n;
    n.op = op;
    if (tok.peek() != ')') {
      n.children.push_back(parse_expression());
      while (tok.consume(',')) n.children.push_back(parse_expression());
    }
    if (!tok.consume(')')) throw ParseError("expected ')'", tok.pos);
    if (n.children.size() != arity)
      throw ParseError("function '" + name + "' takes " + std::to_string(arity) +
                           " argument(s), got " + std::to_string(n.children.size()),
                       start);
    return n;
  }

  static Node binary(Op op, Node l, Node r) {
    Node n;
    n.op = op;
    n.children.push_back(std::move(l));
    n.children.push_back(std::move(r));
    return n;
  }
};

}  // namespace

struct Expression::Impl {
  Node root;
  std::vector<std::string> variables;
  std::vector<Instr> program;  // postfix
  std::size_t stack_size = 0;

  void compile(const Node& n, std::size_t& depth, std::size_t live) {
    for (const Node& c : n.children) {
      compile(c, depth, live);
      ++live;
      depth = std::max(depth, live);
    }
    live -= n.children.size();
    program.push_back({n.op, n.number, n.var_index, &n});
    depth = std::max(depth, live + 1);
  }
};

const std::vector<std::string>& Expression::variables() const {
  static const std::vector<std::string> empty;
  return impl_ ? impl_->variables : empty;
}

std::string Expression::str() const {
  return impl_ ? print_node(impl_->root) : std::string();
}

double Expression::operator()(std::span<const double> values) const {
  if (!impl_) throw EvalError("empty expression", "");
  if (values.size() != impl_->variables.size())
    throw EvalError("wrong number of variable values", print_node(impl_->root));

  double stack[64];
  std::size_t top = 0;
  for (const Instr& ins : impl_->program) {
    double v;
    switch (ins.op) {
      case Op::push_const: v = ins.number; break;
      case Op::push_var: v = values[ins.var_index]; break;
      case Op::neg: v = -stack[top - 1]; --top; break;
      case Op::add: v = stack[top - 2] + stack[top - 1]; top -= 2; break;
      case Op::sub: v = stack[top - 2] - stack[top - 1]; top -= 2; break;
      case Op::mul: v = stack[top - 2] * stack[top - 1]; top -= 2; break;
      case Op::div: v = stack[top - 2] / stack[top - 1]; top -= 2; break;
      case Op::pow: {
        const double b = stack[top - 2], e = stack[top - 1];
        top -= 2;
        if (b < 0.0 && e != std::floor(e))
          throw EvalError("negative base with non-integer exponent", print_node(*ins.node));
        v = std::pow(b, e);
        break;
      }
      case Op::fsin: v = std::sin(stack[top - 1]); --top; break;
      case Op::fcos: v = std::cos(stack[top - 1]); --top; break;
      case Op::ftan: v = std::tan(stack[top - 1]); --top; break;
      case Op::fexp: v = std::exp(stack[top - 1]); --top; break;
      case Op::flog: v = std::log(stack[top - 1]); --top; break;
      case Op::fsqrt: v = std::sqrt(stack[top - 1]); --top; break;
      case Op::fabs_: v = std::fabs(stack[top - 1]); --top; break;
      case Op::fatan: v = std::atan(stack[top - 1]); --top; break;
      case Op::fmin_: v = std::fmin(stack[top - 2], stack[top - 1]); top -= 2; break;
      case Op::fmax_: v = std::fmax(stack[top - 2], stack[top - 1]); top -= 2; break;
      default: v = 0.0; break;
    }
    if (!std::isfinite(v)) throw EvalError("non-finite value", print_node(*ins.node));
    stack[top++] = v;
  }
  return stack[0];
}

double Expression::operator()(const std::map<std::string, double>& bindings) const {
  if (!impl_) throw EvalError("empty expression", "");
  std::vector<double> values;
  values.reserve(impl_->variables.size());
  for (const std::string& name : impl_->variables) {
    auto it = bindings.find(name);
    if (it == bindings.end()) throw EvalError("missing binding for '" + name + "'", str());
    values.push_back(it->second);
  }
  return (*this)(values);
}

Expression parse(std::string_view source, std::vector<std::string> allowed_vars) {
  if (source.empty()) throw ParseError("empty expression", 0);
  auto impl = std::make_shared<Expression::Impl>();
  impl->variables = std::move(allowed_vars);
  Parser parser{Tokenizer{source, 0}, impl->variables};
  impl->root = parser.parse_expression();
  parser.tok.skip_ws();
  if (parser.tok.pos != source.size())
    throw ParseError("trailing input", parser.tok.pos);
  std::size_t depth = 0;
  impl->compile(impl->root, depth, 0);
  if (depth > 64) throw ParseError("expression too deep", 0);
  impl->stack_size = depth;
  Expression e;
  e.impl_ = std::move(impl);
  return e;
}

}  // namespace hlbvp::expr
