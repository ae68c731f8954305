/// @file expression.hpp
/// @brief Closed-form profile expressions over macroscopic coordinates x, y, z.
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace zrp {

class Expression {
public:
    /// Grammar: numbers, pi, e, x, y, z, + - * / ^, unary minus, parentheses, sin cos exp log sqrt abs.
    static Expression parse(const std::string& text);
    double operator()(const std::vector<double>& point) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace zrp
