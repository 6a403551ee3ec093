#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwax/interval.hpp"

namespace pwax {

struct UnboundVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotDifferentiable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExprKind {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    PowInt,
    Neg,
    Sin,
    Cos,
    Sqrt,
    Exp,
    Log,
    Abs,
};

/// Immutable symbolic expression tree.
///
/// Trees are shared via reference counting; all operations build new
/// trees and never mutate existing ones, so concurrent reads are safe.
class Expr {
  public:
    struct Node;

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double value);
    static Expr variable(const std::string& name);

    ExprKind kind() const;
    double constant_value() const;
    const std::string& variable_name() const;
    int exponent() const;
    std::size_t child_count() const;
    const Expr& child(std::size_t i) const;

    bool is_constant() const { return kind() == ExprKind::Constant; }

    /// IEEE-double evaluation with all variables bound.
    double eval(const std::map<std::string, double>& bindings) const;
    /// Containment-sound interval enclosure of the image over a box.
    Interval eval(const std::map<std::string, Interval>& bindings) const;

    /// Symbolic derivative with respect to `var`. Abs is rejected.
    Expr derivative(const std::string& var) const;

    /// Constant folding and unit/zero identities; semantics preserved.
    Expr simplified() const;

    /// Canonical infix form; parsing it back reproduces the same string.
    std::string str() const;

    std::set<std::string> variables() const;
    /// Name of the single free variable; throws unless there is exactly
    /// one (constants are allowed and yield an empty string).
    std::string single_variable() const;

    std::size_t node_count() const;

    const Node* raw() const { return node_.get(); }

  private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend struct ExprFactory;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
/// n == 0 folds to the constant 1; any other n builds a PowInt node.
Expr pow_int(const Expr& a, int n);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sqrt(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr abs(const Expr& a);

/// Parse the conventional infix grammar: numbers, identifiers,
/// + - * / ^ (integer exponents), sin cos sqrt exp log abs, parentheses.
Expr parse_expression(const std::string& text);

/// Expression compiled to a flat program for fast repeated evaluation
/// at a single variable. Evaluation follows IEEE semantics (domain
/// violations produce inf/nan instead of throwing).
class CompiledUnary {
  public:
    CompiledUnary() = default;
    CompiledUnary(const Expr& e, const std::string& var);

    double operator()(double x) const;

  private:
    struct Instr {
        ExprKind op;
        double value = 0.0;
        int exponent = 0;
    };
    std::vector<Instr> program_;
    std::size_t stack_need_ = 1;
};

} // namespace pwax
