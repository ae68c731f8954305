#include "zrp/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace zrp {

struct Expression::Node {
    char op = 0;  // 'n' number, 'v' variable, 'f' function, 'u' negate, or a binary operator
    double value = 0.0;
    int variable = 0;
    std::string function;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(const std::vector<double>& p) const {
        switch (op) {
            case 'n': return value;
            case 'v': return variable < static_cast<int>(p.size()) ? p[variable] : 0.0;
            case 'u': return -lhs->eval(p);
            case '+': return lhs->eval(p) + rhs->eval(p);
            case '-': return lhs->eval(p) - rhs->eval(p);
            case '*': return lhs->eval(p) * rhs->eval(p);
            case '/': return lhs->eval(p) / rhs->eval(p);
            case '^': return std::pow(lhs->eval(p), rhs->eval(p));
            case 'f': {
                double a = lhs->eval(p);
                if (function == "sin") return std::sin(a);
                if (function == "cos") return std::cos(a);
                if (function == "exp") return std::exp(a);
                if (function == "log") return std::log(a);
                if (function == "sqrt") return std::sqrt(a);
                return std::abs(a);
            }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        auto n = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression '" + s_ + "': " + msg + " at offset " + std::to_string(pos_));
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
    static NodePtr binary(char op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Expression::Node>();
        n->op = op;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }
    NodePtr sum() {
        auto n = product();
        while (true) {
            if (accept('+')) n = binary('+', n, product());
            else if (accept('-')) n = binary('-', n, product());
            else return n;
        }
    }
    NodePtr product() {
        auto n = unary();
        while (true) {
            if (accept('*')) n = binary('*', n, unary());
            else if (accept('/')) n = binary('/', n, unary());
            else return n;
        }
    }
    NodePtr unary() {
        if (accept('-')) {
            auto n = std::make_shared<Expression::Node>();
            n->op = 'u';
            n->lhs = unary();
            return n;
        }
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        auto base = atom();
        if (accept('^')) return binary('^', base, unary());
        return base;
    }
    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (accept('(')) {
            auto n = sum();
            if (!accept(')')) fail("missing ')'");
            return n;
        }
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            auto n = std::make_shared<Expression::Node>();
            n->op = 'n';
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            auto n = std::make_shared<Expression::Node>();
            if (name == "x" || name == "y" || name == "z") {
                n->op = 'v';
                n->variable = name[0] - 'x';
                return n;
            }
            if (name == "pi" || name == "e") {
                n->op = 'n';
                n->value = name == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
                return n;
            }
            if (name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "sqrt" || name == "abs") {
                if (!accept('(')) fail("expected '(' after " + name);
                n->op = 'f';
                n->function = name;
                n->lhs = sum();
                if (!accept(')')) fail("missing ')'");
                return n;
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text).parse();
    return e;
}

double Expression::operator()(const std::vector<double>& point) const { return root_->eval(point); }

}  // namespace zrp
