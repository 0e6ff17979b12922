#include "cqg/expression.hpp"

#include <cctype>
#include <charconv>
#include <numbers>

namespace cqg {

namespace {

struct Builtin {
  const char* name;
  Op op;
  int arity;
};

constexpr Builtin kBuiltins[] = {
    {"exp", Op::Exp, 1},   {"log", Op::Log, 1},   {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},   {"sinh", Op::Sinh, 1}, {"cosh", Op::Cosh, 1},
    {"sqrt", Op::Sqrt, 1}, {"atan2", Op::Atan2, 2},
};

NodePtr make(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& coords,
         const Constants& constants)
      : text_(text), coords_(coords), constants_(constants) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make_constant(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id = text_.substr(start, pos_ - start);
    for (const auto& b : kBuiltins) {
      if (id != b.name) continue;
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != '(') {
        fail("builtin '" + id + "' must be called");
      }
      ++pos_;
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (static_cast<int>(args.size()) != b.arity) {
        pos_ = start;
        fail("'" + id + "' takes " + std::to_string(b.arity) + " argument(s)");
      }
      return make(b.op, std::move(args));
    }
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == id) {
        auto n = std::make_shared<Node>();
        n->op = Op::Variable;
        n->variable = static_cast<int>(i);
        return n;
      }
    }
    if (auto it = constants_.find(id); it != constants_.end()) {
      if (it->second < 0.0) return make(Op::Neg, {make_constant(-it->second)});
      return make_constant(it->second);
    }
    if (id == "pi") return make_constant(std::numbers::pi);
    throw UnknownIdentifierError(id, start);
  }

  const std::string& text_;
  const std::vector<std::string>& coords_;
  const Constants& constants_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (v < 0.0) return "(-" + s.substr(1) + ")";
  return s;
}

void print_node(const Node& n, const std::vector<std::string>& coords, std::string& out) {
  auto binary = [&](const char* sym) {
    out += '(';
    print_node(*n.args[0], coords, out);
    out += sym;
    print_node(*n.args[1], coords, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) out += ", ";
      print_node(*n.args[i], coords, out);
    }
    out += ')';
  };
  switch (n.op) {
    case Op::Constant: out += format_number(n.value); return;
    case Op::Variable: out += coords.at(n.variable); return;
    case Op::Add: binary(" + "); return;
    case Op::Sub: binary(" - "); return;
    case Op::Mul: binary(" * "); return;
    case Op::Div: binary(" / "); return;
    case Op::Pow: binary("^"); return;
    case Op::Neg:
      out += "(-";
      print_node(*n.args[0], coords, out);
      out += ')';
      return;
    case Op::Exp: call("exp"); return;
    case Op::Log: call("log"); return;
    case Op::Sin: call("sin"); return;
    case Op::Cos: call("cos"); return;
    case Op::Sinh: call("sinh"); return;
    case Op::Cosh: call("cosh"); return;
    case Op::Sqrt: call("sqrt"); return;
    case Op::Atan2: call("atan2"); return;
  }
}

}  // namespace

bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Constant && a.value != b.value) return false;
  if (a.op == Op::Variable && a.variable != b.variable) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

std::string Expression::print() const {
  std::string out;
  print_node(*root_, coords_, out);
  return out;
}

Expression parse(const std::string& text, const std::vector<std::string>& coords,
                 const Constants& constants) {
  Parser parser(text, coords, constants);
  return Expression(parser.parse(), coords);
}

double evaluate(const Expression& e, std::span<const double> point) {
  return e.eval<double>(point);
}

double derive(const Expression& e, std::span<const double> point,
              std::span<const int> multi_index) {
  if (multi_index.size() != point.size()) {
    throw Error("multi-index length does not match the point");
  }
  int order = 0;
  for (int a : multi_index) {
    if (a < 0) throw Error("negative derivative count");
    order += a;
  }
  if (order > 3) throw Error("derivative order above 3 is not supported");
  if (point.empty()) return evaluate(e, point);
  const std::vector<Jet> vars = seed(point, order);
  const Jet result = e.eval<Jet>(vars);
  return result.partial(multi_index);
}

}  // namespace cqg
