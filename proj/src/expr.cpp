#include "cdi/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

#include "cdi/errors.hpp"

namespace cdi {

namespace {

struct Node {
    enum class Kind { constant, variable, add, sub, mul, div, neg, pow, exp, log };
    Kind kind;
    double value = 0.0;
    std::unique_ptr<Node> lhs, rhs;

    double eval(double x) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::variable: return x;
            case Kind::add: return lhs->eval(x) + rhs->eval(x);
            case Kind::sub: return lhs->eval(x) - rhs->eval(x);
            case Kind::mul: return lhs->eval(x) * rhs->eval(x);
            case Kind::div: return lhs->eval(x) / rhs->eval(x);
            case Kind::neg: return -lhs->eval(x);
            case Kind::pow: return std::pow(lhs->eval(x), rhs->eval(x));
            case Kind::exp: return std::exp(lhs->eval(x));
            case Kind::log: return std::log(lhs->eval(x));
        }
        return 0.0;
    }
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw DomainError("density expression parse error at position " + std::to_string(pos) +
                          ": " + what);
    }

    NodePtr parse_expression() {
        NodePtr n = parse_term();
        for (;;) {
            if (consume('+'))
                n = make(Node::Kind::add, std::move(n), parse_term());
            else if (consume('-'))
                n = make(Node::Kind::sub, std::move(n), parse_term());
            else
                return n;
        }
    }

    NodePtr parse_term() {
        NodePtr n = parse_unary();
        for (;;) {
            if (consume('*'))
                n = make(Node::Kind::mul, std::move(n), parse_unary());
            else if (consume('/'))
                n = make(Node::Kind::div, std::move(n), parse_unary());
            else
                return n;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make(Node::Kind::neg, parse_unary());
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            NodePtr n = parse_expression();
            if (!consume(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text.c_str() + pos;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) fail("malformed number");
            pos += static_cast<std::size_t>(end - start);
            auto n = make(Node::Kind::constant);
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < text.size() &&
                   std::isalnum(static_cast<unsigned char>(text[pos])))
                ++pos;
            std::string name = text.substr(start, pos - start);
            if (name == "x") return make(Node::Kind::variable);
            if (name == "exp" || name == "log") {
                if (!consume('(')) fail("expected '(' after " + name);
                NodePtr arg = parse_expression();
                if (!consume(')')) fail("expected ')'");
                return make(name == "exp" ? Node::Kind::exp : Node::Kind::log, std::move(arg));
            }
            if (name == "pow") {
                if (!consume('(')) fail("expected '(' after pow");
                NodePtr a = parse_expression();
                if (!consume(',')) fail("expected ',' in pow");
                NodePtr b = parse_expression();
                if (!consume(')')) fail("expected ')'");
                return make(Node::Kind::pow, std::move(a), std::move(b));
            }
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character");
    }
};

}  // namespace

std::function<double(double)> parse_density_expr(const std::string& text) {
    Parser parser(text);
    NodePtr root = parser.parse_expression();
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    std::shared_ptr<Node> shared(root.release());
    return [shared](double x) { return shared->eval(x); };
}

}  // namespace cdi
