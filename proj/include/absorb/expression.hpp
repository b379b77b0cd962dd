#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace absorb {

/// Small arithmetic expression over the variables x and y.
///
/// Grammar: numbers, x, y, pi, e, + - * / ^ (right associative), unary minus,
/// parentheses and the functions sin cos tan exp log sqrt abs atan tanh.
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(double x, double y = 0.0) const;

    bool uses_y() const { return uses_y_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_y_ = false;
};

}  // namespace absorb
