#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small arithmetic expression language used for user-supplied functions:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?            right associative
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//
// func is one of sin cos exp ln sqrt abs; pi and e are constants unless a
// declared variable shadows them.
namespace rdsym::expr {

enum class Func : std::uint8_t { sin, cos, exp, ln, sqrt, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind : std::uint8_t { number, variable, neg, add, sub, mul, div, pow, call };

    Kind kind = Kind::number;
    double value = 0.0;    // number
    std::size_t index = 0;  // variable
    Func func = Func::sin;  // call
    NodePtr lhs;            // unary operand / left
    NodePtr rhs;
};

// Flat postfix program compiled from the tree; shared by the scalar and the
// batched evaluators so both follow the same operation sequence.
struct Instr {
    enum class Op : std::uint8_t { constant, variable, neg, add, sub, mul, div, pow, ipow, call };
    Op op;
    Func func = Func::sin;
    std::int32_t exponent = 0;  // ipow
    std::size_t index = 0;      // variable
    double value = 0.0;         // constant
};

class Expression {
public:
    // Throws ParseError (with character offset) on malformed input or an
    // identifier that is neither a declared variable, a constant, nor a
    // function name.
    static Expression parse(std::string_view source, std::vector<std::string> variables);

    static Expression constant(double value, std::vector<std::string> variables = {});

    const std::vector<std::string>& variables() const noexcept { return variables_; }
    std::size_t arity() const noexcept { return variables_.size(); }

    // values.size() must equal arity(). Throws DomainError when an operation
    // leaves its domain or the result is not finite.
    double evaluate(std::span<const double> values) const;

    // Column-wise evaluation: columns[k] holds the k-th variable for every
    // point; all columns and out share one length.
    void evaluate_batch(std::span<const std::span<const double>> columns,
                        std::span<double> out) const;

    // Replace the named variables by constants (removing them from the
    // variable list) and fold constant subtrees.
    Expression bind(const std::map<std::string, double>& values) const;

    // Fully parenthesized text that parses back to the same value.
    std::string to_string() const;

    const NodePtr& root() const noexcept { return root_; }

private:
    Expression(NodePtr root, std::vector<std::string> variables);
    void compile();

    NodePtr root_;
    std::vector<std::string> variables_;
    std::vector<Instr> program_;
    std::size_t max_depth_ = 0;
};

// x^n for small integer n by repeated squaring; used everywhere an integer
// exponent is known so scalar and batched paths agree bit for bit.
double integer_power(double x, std::int32_t n) noexcept;

}  // namespace rdsym::expr
