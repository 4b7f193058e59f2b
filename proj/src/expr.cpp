#include "npns/expr.hpp"

#include <array>
#include <cctype>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "npns/error.hpp"

namespace npns {

struct Expr::Node {
    enum Op { num, var_x, var_y, add, sub, mul, div, neg, sin, cos, exp, gauss } op;
    double value = 0.0;
};

namespace {

using Node = Expr::Node;

constexpr int max_stack = 64;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    std::vector<Node> run() {
        expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return std::move(out_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression '" + s_ + "' at position " + std::to_string(pos_) + ": " + msg);
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
    void emit(Node::Op op, double v = 0.0) { out_.push_back({op, v}); }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit(Node::add);
            } else if (accept('-')) {
                term();
                emit(Node::sub);
            } else {
                return;
            }
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit(Node::mul);
            } else if (accept('/')) {
                unary();
                emit(Node::div);
            } else {
                return;
            }
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            emit(Node::neg);
        } else if (accept('+')) {
            unary();
        } else {
            primary();
        }
    }
    void primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("bad number");
            pos_ = static_cast<std::size_t>(p - s_.data());
            emit(Node::num, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "x") return emit(Node::var_x);
            if (id == "y") return emit(Node::var_y);
            if (id == "pi") return emit(Node::num, std::numbers::pi);
            int arity = 1;
            Node::Op op;
            if (id == "sin") op = Node::sin;
            else if (id == "cos") op = Node::cos;
            else if (id == "exp") op = Node::exp;
            else if (id == "gaussian") {
                op = Node::gauss;
                arity = 3;
            } else {
                pos_ = start;
                fail("unknown name '" + id + "'");
            }
            expect('(');
            for (int a = 0; a < arity; ++a) {
                if (a > 0) expect(',');
                expr();
            }
            expect(')');
            emit(op);
            return;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    std::vector<Node> out_;
};

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.text_ = text;
    auto nodes = Parser(text).run();
    int depth = 0, peak = 0;
    for (const auto& n : nodes) {
        if (n.op == Node::var_x || n.op == Node::var_y || n.op == Node::gauss) e.constant_ = false;
        if (n.op <= Node::var_y) ++depth;
        else if (n.op <= Node::div) --depth;
        else if (n.op == Node::gauss) depth -= 2;
        peak = std::max(peak, depth);
    }
    if (peak > max_stack) throw ConfigError("expression '" + text + "' nests too deeply");
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(nodes));
    return e;
}

Expr Expr::constant(double v) {
    Expr e;
    std::array<char, 32> buf{};
    auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    e.text_.assign(buf.data(), r.ptr);
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{{Node::num, v}});
    return e;
}

double Expr::operator()(double x, double y) const {
    if (!nodes_) return 0.0;
    double st[max_stack];
    int top = 0;
    for (const Node& n : *nodes_) {
        switch (n.op) {
        case Node::num: st[top++] = n.value; break;
        case Node::var_x: st[top++] = x; break;
        case Node::var_y: st[top++] = y; break;
        case Node::add: --top; st[top - 1] += st[top]; break;
        case Node::sub: --top; st[top - 1] -= st[top]; break;
        case Node::mul: --top; st[top - 1] *= st[top]; break;
        case Node::div: --top; st[top - 1] /= st[top]; break;
        case Node::neg: st[top - 1] = -st[top - 1]; break;
        case Node::sin: st[top - 1] = std::sin(st[top - 1]); break;
        case Node::cos: st[top - 1] = std::cos(st[top - 1]); break;
        case Node::exp: st[top - 1] = std::exp(st[top - 1]); break;
        case Node::gauss: {
            top -= 2;
            const double cx = st[top - 1], cy = st[top], s = st[top + 1];
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            st[top - 1] = std::exp(-r2 / (2.0 * s * s));
            break;
        }
        }
    }
    return st[0];
}

} // namespace npns
