#ifndef MIXLAB_EXPR_HPP
#define MIXLAB_EXPR_HPP

#include <cctype>
#include <functional>
#include <memory>
#include <string>

#include "mixlab/core.hpp"

namespace mixlab::expr {

// Minimal expression grammar for user-supplied Hamiltonians:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?          (right associative)
//   unary   := ('-'|'+')? primary
//   primary := number | 'pi' | 'e' | 'x1' | 'x2' | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'exp'
// Variables x1, x2 are the two coordinates.

struct Node {
    enum Kind { Num, Var1, Var2, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp } kind;
    double value = 0.0;
    std::unique_ptr<Node> a, b;

    double eval(double x1, double x2) const {
        switch (kind) {
            case Num: return value;
            case Var1: return x1;
            case Var2: return x2;
            case Add: return a->eval(x1, x2) + b->eval(x1, x2);
            case Sub: return a->eval(x1, x2) - b->eval(x1, x2);
            case Mul: return a->eval(x1, x2) * b->eval(x1, x2);
            case Div: return a->eval(x1, x2) / b->eval(x1, x2);
            case Pow: return std::pow(a->eval(x1, x2), b->eval(x1, x2));
            case Neg: return -a->eval(x1, x2);
            case Sin: return std::sin(a->eval(x1, x2));
            case Cos: return std::cos(a->eval(x1, x2));
            case Exp: return std::exp(a->eval(x1, x2));
        }
        return 0.0;
    }
};

class Parser {
public:
    explicit Parser(std::string src) : src_(std::move(src)) {}

    std::unique_ptr<Node> parse() {
        auto n = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ConfigError("expr: trailing input at position " + std::to_string(pos_) +
                              " in '" + src_ + "'");
        return n;
    }

private:
    std::string src_;
    size_t pos_ = 0;

    void skip_ws() { while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) ++pos_; }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    static std::unique_ptr<Node> make(Node::Kind k, std::unique_ptr<Node> a = nullptr,
                                      std::unique_ptr<Node> b = nullptr) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    std::unique_ptr<Node> parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (eat('+')) lhs = make(Node::Add, std::move(lhs), parse_term());
            else if (eat('-')) lhs = make(Node::Sub, std::move(lhs), parse_term());
            else return lhs;
        }
    }

    std::unique_ptr<Node> parse_term() {
        auto lhs = parse_factor();
        for (;;) {
            if (eat('*')) lhs = make(Node::Mul, std::move(lhs), parse_factor());
            else if (eat('/')) lhs = make(Node::Div, std::move(lhs), parse_factor());
            else return lhs;
        }
    }

    std::unique_ptr<Node> parse_factor() {
        auto base = parse_unary();
        if (eat('^')) return make(Node::Pow, std::move(base), parse_factor());
        return base;
    }

    std::unique_ptr<Node> parse_unary() {
        if (eat('-')) return make(Node::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_primary();
    }

    std::unique_ptr<Node> parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ConfigError("expr: unexpected end of input in '" + src_ + "'");
        char c = src_[pos_];
        if (std::isdigit((unsigned char)c) || c == '.') {
            size_t end = 0;
            double v = std::stod(src_.substr(pos_), &end);
            pos_ += end;
            auto n = make(Node::Num);
            n->value = v;
            return n;
        }
        if (c == '(') {
            ++pos_;
            auto n = parse_expr();
            if (!eat(')')) throw ConfigError("expr: missing ')' in '" + src_ + "'");
            return n;
        }
        if (std::isalpha((unsigned char)c)) {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
                ++pos_;
            std::string id = src_.substr(start, pos_ - start);
            if (id == "pi") { auto n = make(Node::Num); n->value = pi; return n; }
            if (id == "e") { auto n = make(Node::Num); n->value = std::exp(1.0); return n; }
            if (id == "x1" || id == "x") return make(Node::Var1);
            if (id == "x2" || id == "y") return make(Node::Var2);
            Node::Kind k;
            if (id == "sin") k = Node::Sin;
            else if (id == "cos") k = Node::Cos;
            else if (id == "exp") k = Node::Exp;
            else throw ConfigError("expr: unknown identifier '" + id + "'");
            if (!eat('(')) throw ConfigError("expr: '" + id + "' needs '('");
            auto arg = parse_expr();
            if (!eat(')')) throw ConfigError("expr: missing ')' after '" + id + "'");
            return make(k, std::move(arg));
        }
        throw ConfigError(std::string("expr: unexpected character '") + c + "' in '" + src_ + "'");
    }
};

/// Compiles an expression into a plain value evaluator.
inline std::function<double(double, double)> compile(const std::string& src) {
    auto ast = std::shared_ptr<Node>(Parser(src).parse().release());
    return [ast](double x1, double x2) { return ast->eval(x1, x2); };
}

} // namespace mixlab::expr

#endif
