#pragma once

#include <memory>
#include <string>
#include <vector>

namespace npns {

/// Arithmetic expression in x and y: numbers, x, y, pi, + - * /, parentheses,
/// sin, cos, exp and gaussian(cx, cy, s) = exp(-((x-cx)^2 + (y-cy)^2) / (2 s^2)).
class Expr {
public:
    /// Throws ConfigError with the offending position on a syntax error.
    static Expr parse(const std::string& text);
    static Expr constant(double v);

    double operator()(double x, double y) const;
    const std::string& text() const noexcept { return text_; }
    /// True if the expression does not reference x or y.
    bool is_constant() const noexcept { return constant_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const std::vector<Node>> nodes_;  // postfix program
    bool constant_ = true;
};

} // namespace npns
