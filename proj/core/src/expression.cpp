#include "steinkit/expression.hpp"
#include "steinkit/errors.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace steinkit {

enum class NodeOp {
    Const, Var, Add, Sub, Mul, Div, Pow, Neg,
    Exp, Log, Abs, Sqrt, Erf, Min, Max, Indicator
};

struct ExpressionAst::Node {
    NodeOp op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExpressionAst::Node>;

double eval_node(const ExpressionAst::Node& n, double x) {
    switch (n.op) {
    case NodeOp::Const: return n.value;
    case NodeOp::Var: return x;
    case NodeOp::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case NodeOp::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case NodeOp::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case NodeOp::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case NodeOp::Pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
    case NodeOp::Neg: return -eval_node(*n.lhs, x);
    case NodeOp::Exp: return std::exp(eval_node(*n.lhs, x));
    case NodeOp::Log: return std::log(eval_node(*n.lhs, x));
    case NodeOp::Abs: return std::fabs(eval_node(*n.lhs, x));
    case NodeOp::Sqrt: return std::sqrt(eval_node(*n.lhs, x));
    case NodeOp::Erf: return std::erf(eval_node(*n.lhs, x));
    case NodeOp::Min:
        return std::min(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
    case NodeOp::Max:
        return std::max(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
    case NodeOp::Indicator:
        return eval_node(*n.lhs, x) >= 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        return e;
    }

  private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression error at position " +
                             std::to_string(pos_) + ": " + msg,
                         pos_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    static NodePtr mk(NodeOp op, NodePtr l = nullptr, NodePtr r = nullptr,
                      double v = 0.0) {
        auto n = std::make_shared<ExpressionAst::Node>();
        n->op = op; n->lhs = std::move(l); n->rhs = std::move(r); n->value = v;
        return n;
    }

    NodePtr expr() {
        NodePtr e = term();
        while (true) {
            if (eat('+')) e = mk(NodeOp::Add, e, term());
            else if (eat('-')) e = mk(NodeOp::Sub, e, term());
            else return e;
        }
    }
    NodePtr term() {
        NodePtr e = factor();
        while (true) {
            if (eat('*')) e = mk(NodeOp::Mul, e, factor());
            else if (eat('/')) e = mk(NodeOp::Div, e, factor());
            else return e;
        }
    }
    // '^' is right associative and binds tighter than unary minus,
    // so -x^2 reads as -(x^2) while 2^-3 still parses.
    NodePtr factor() {
        if (eat('-')) return mk(NodeOp::Neg, factor());
        NodePtr base = primary();
        if (eat('^')) return mk(NodeOp::Pow, base, factor());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return mk(NodeOp::Const, nullptr, nullptr, v);
        }
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                    s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return mk(NodeOp::Var);
            if (name == "pi")
                return mk(NodeOp::Const, nullptr, nullptr,
                          3.14159265358979323846);
            NodeOp op;
            int arity = 1;
            if (name == "exp") op = NodeOp::Exp;
            else if (name == "log") op = NodeOp::Log;
            else if (name == "abs") op = NodeOp::Abs;
            else if (name == "sqrt") op = NodeOp::Sqrt;
            else if (name == "erf") op = NodeOp::Erf;
            else if (name == "indicator") op = NodeOp::Indicator;
            else if (name == "min") { op = NodeOp::Min; arity = 2; }
            else if (name == "max") { op = NodeOp::Max; arity = 2; }
            else { pos_ = start; fail("unknown identifier '" + name + "'"); }
            if (!eat('(')) fail("expected '(' after '" + name + "'");
            NodePtr a = expr();
            NodePtr b;
            if (arity == 2) {
                if (!eat(',')) fail("expected ',' in '" + name + "'");
                b = expr();
            }
            if (!eat(')')) fail("expected ')'");
            return mk(op, a, b);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

ExpressionAst ExpressionAst::parse(const std::string& text) {
    ExpressionAst ast;
    ast.root_ = Parser(text).run();
    ast.text_ = text;
    return ast;
}

double ExpressionAst::eval(double x) const {
    if (!root_) throw SteinkitError("evaluating an empty expression");
    return eval_node(*root_, x);
}

} // namespace steinkit
