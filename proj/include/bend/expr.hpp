#pragma once

#include <map>
#include <memory>
#include <string>

namespace bend {

// Small expression language for graph surfaces and profiles: numbers,
// variables, + - * / ^ (integer powers), sqrt, sin, cos. Supports symbolic
// differentiation so user surfaces get analytic jets.
class Expr {
  public:
    static Expr parse(const std::string& text);

    double eval(const std::map<std::string, double>& vars) const;
    Expr derivative(const std::string& var) const;
    std::string str() const;

    struct Node;
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    Expr() = default;
    bool empty() const { return !root_; }

  private:
    std::shared_ptr<const Node> root_;
};

} // namespace bend
