#pragma once

// Small arithmetic expression parser for closed-form boundary data and
// graph functions given in config files: numbers, variables, + - * / ^,
// parentheses and the usual unary functions.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ektau/common.hpp"
#include "ektau/families.hpp"

namespace ektau {

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, size_t position)
        : std::runtime_error(what + " (at character " + std::to_string(position) + ")"),
          position(position) {}
    size_t position;
};

class Expression {
    struct Node {
        enum class Kind { Number, Variable, Unary, Binary, Call } kind;
        double number = 0;
        std::string name;  // variable or function
        char op = 0;
        std::shared_ptr<Node> lhs, rhs;
    };
    using NodePtr = std::shared_ptr<Node>;

public:
    static Expression parse(const std::string& text) {
        Parser parser{text, 0};
        Expression e;
        e.root_ = parser.parse_expression();
        parser.skip_space();
        if (parser.pos != text.size())
            throw ParseError("unexpected trailing input '" + text.substr(parser.pos) + "'",
                             parser.pos);
        e.text_ = text;
        return e;
    }

    double evaluate(const std::map<std::string, double>& vars) const {
        return eval(root_.get(), vars);
    }

    // convenience for fields on the (y, z) parameter plane
    double operator()(double y, double z) const { return evaluate({{"y", y}, {"z", z}}); }

    const std::string& text() const { return text_; }

private:
    NodePtr root_;
    std::string text_;

    static double eval(const Node* n, const std::map<std::string, double>& vars) {
        switch (n->kind) {
            case Node::Kind::Number:
                return n->number;
            case Node::Kind::Variable: {
                if (n->name == "pi") return M_PI;
                if (n->name == "e") return M_E;
                const auto it = vars.find(n->name);
                if (it == vars.end())
                    throw DomainError("expression: unbound variable '" + n->name + "'");
                return it->second;
            }
            case Node::Kind::Unary:
                return n->op == '-' ? -eval(n->lhs.get(), vars) : eval(n->lhs.get(), vars);
            case Node::Kind::Binary: {
                const double a = eval(n->lhs.get(), vars), b = eval(n->rhs.get(), vars);
                switch (n->op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    default: return std::pow(a, b);
                }
            }
            case Node::Kind::Call: {
                const double a = eval(n->lhs.get(), vars);
                if (n->name == "sin") return std::sin(a);
                if (n->name == "cos") return std::cos(a);
                if (n->name == "tan") return std::tan(a);
                if (n->name == "exp") return std::exp(a);
                if (n->name == "log" || n->name == "ln") return std::log(a);
                if (n->name == "sqrt") return std::sqrt(a);
                if (n->name == "abs") return std::abs(a);
                if (n->name == "sinh") return std::sinh(a);
                if (n->name == "cosh") return std::cosh(a);
                if (n->name == "tanh") return std::tanh(a);
                if (n->name == "atan") return std::atan(a);
                if (n->name == "asinh") return std::asinh(a);
                throw DomainError("expression: unknown function '" + n->name + "'");
            }
        }
        return 0.0;
    }

    struct Parser {
        const std::string& text;
        size_t pos;

        void skip_space() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        }
        char peek() {
            skip_space();
            return pos < text.size() ? text[pos] : '\0';
        }
        bool consume(char c) {
            if (peek() == c) {
                ++pos;
                return true;
            }
            return false;
        }

        NodePtr parse_expression() {
            NodePtr lhs = parse_term();
            while (true) {
                const char c = peek();
                if (c != '+' && c != '-') return lhs;
                ++pos;
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Binary;
                node->op = c;
                node->lhs = lhs;
                node->rhs = parse_term();
                lhs = node;
            }
        }

        NodePtr parse_term() {
            NodePtr lhs = parse_unary();
            while (true) {
                const char c = peek();
                if (c != '*' && c != '/') return lhs;
                ++pos;
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Binary;
                node->op = c;
                node->lhs = lhs;
                node->rhs = parse_unary();
                lhs = node;
            }
        }

        // unary minus binds looser than '^': -y^2 means -(y^2)
        NodePtr parse_unary() {
            const char c = peek();
            if (c == '-' || c == '+') {
                ++pos;
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Unary;
                node->op = c;
                node->lhs = parse_unary();
                return node;
            }
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_primary();
            if (peek() == '^') {
                ++pos;
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Binary;
                node->op = '^';
                node->lhs = base;
                node->rhs = parse_unary();  // right associative, signs allowed
                return node;
            }
            return base;
        }

        NodePtr parse_primary() {
            skip_space();
            if (pos >= text.size()) throw ParseError("unexpected end of expression", pos);
            const char c = text[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                size_t used = 0;
                double value;
                try {
                    value = std::stod(text.substr(pos), &used);
                } catch (const std::exception&) {
                    throw ParseError("malformed number", pos);
                }
                pos += used;
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Number;
                node->number = value;
                return node;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const size_t start = pos;
                while (pos < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                    ++pos;
                const std::string name = text.substr(start, pos - start);
                if (consume('(')) {
                    NodePtr node = std::make_shared<Node>();
                    node->kind = Node::Kind::Call;
                    node->name = name;
                    node->lhs = parse_expression();
                    if (!consume(')')) throw ParseError("missing ')' after " + name, pos);
                    return node;
                }
                NodePtr node = std::make_shared<Node>();
                node->kind = Node::Kind::Variable;
                node->name = name;
                return node;
            }
            if (c == '(') {
                ++pos;
                NodePtr inner = parse_expression();
                if (!consume(')')) throw ParseError("missing closing ')'", pos);
                return inner;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", pos);
        }
    };
};

// Jets of an expression u(y, z) by fourth order central differences (user
// supplied closed forms do not carry analytic derivatives).
inline GraphJets expression_jets(const Expression& u, double y, double z) {
    const double h = fd_step(std::max(std::abs(y), std::abs(z)));
    auto v = [&](double a, double b) { return u(a, b); };
    GraphJets j;
    j.u = v(y, z);
    j.uy = (v(y - 2 * h, z) - v(y + 2 * h, z) + 8 * (v(y + h, z) - v(y - h, z))) / (12 * h);
    j.uz = (v(y, z - 2 * h) - v(y, z + 2 * h) + 8 * (v(y, z + h) - v(y, z - h))) / (12 * h);
    j.uyy = (-v(y + 2 * h, z) + 16 * v(y + h, z) - 30 * j.u + 16 * v(y - h, z) - v(y - 2 * h, z)) /
            (12 * h * h);
    j.uzz = (-v(y, z + 2 * h) + 16 * v(y, z + h) - 30 * j.u + 16 * v(y, z - h) - v(y, z - 2 * h)) /
            (12 * h * h);
    auto dy = [&](double b) {
        return (v(y - 2 * h, b) - v(y + 2 * h, b) + 8 * (v(y + h, b) - v(y - h, b))) / (12 * h);
    };
    j.uyz = (dy(z - 2 * h) - dy(z + 2 * h) + 8 * (dy(z + h) - dy(z - h))) / (12 * h);
    return j;
}

}  // namespace ektau
