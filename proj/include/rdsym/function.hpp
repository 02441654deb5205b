#pragma once

#include "rdsym/expr.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdsym {

// Samples of a C2 function on a uniform grid: value, first and second
// derivative at every node. Interpolated by piecewise quintic Hermite
// polynomials, which reproduce all three at the nodes.
struct GridSamples {
    double x0 = 0.0;
    double step = 0.0;
    std::vector<double> value;
    std::vector<double> first;
    std::vector<double> second;

    double x1() const noexcept { return x0 + step * static_cast<double>(value.size() - 1); }
};

class FunctionDescriptor {
public:
    enum class Kind { power, exponential, affine, constant, parsed, grid, composite };

    // Closed-form tags (one variable):
    //   power        coefficient * s^parameter
    //   exponential  coefficient * exp(parameter * s)
    //   affine       offset + coefficient * s
    //   constant     coefficient
    struct ClosedForm {
        Kind tag;
        double coefficient;
        double parameter;
        double offset;
    };

    using Callable = std::function<double(std::span<const double>)>;

    FunctionDescriptor();  // constant zero of one variable "s"

    static FunctionDescriptor power(double coefficient, double exponent, std::string var = "s");
    static FunctionDescriptor exponential(double coefficient, double rate, std::string var = "s");
    static FunctionDescriptor affine(double intercept, double slope, std::string var = "s");
    static FunctionDescriptor constant(double value, std::vector<std::string> vars = {"s"});
    static FunctionDescriptor parsed(expr::Expression expression);
    static FunctionDescriptor parse(std::string_view source, std::vector<std::string> vars);
    static FunctionDescriptor grid(GridSamples samples, std::string var = "x");
    // Arbitrary callable; derivatives by finite differences.
    static FunctionDescriptor composite(std::vector<std::string> vars, Callable fn,
                                        std::string description);

    Kind kind() const noexcept;
    std::size_t arity() const noexcept;
    const std::vector<std::string>& variables() const noexcept;
    std::size_t index_of(std::string_view var) const;

    double operator()(std::span<const double> at) const;
    double operator()(double s) const;
    double operator()(double a, double b) const;

    // Exact for closed-form tags and grids, fourth-order finite differences
    // otherwise. order is 1 or 2 (grids and closed forms also accept 0).
    double derivative(std::span<const double> at, std::size_t wrt, int order) const;
    double derivative(double s, int order = 1) const;

    bool analytic_derivatives() const noexcept;

    // columns[k] is the k-th variable at every point. Parsed descriptors run
    // through the vectorized evaluator; others loop.
    void evaluate_batch(std::span<const std::span<const double>> columns,
                        std::span<double> out) const;

    const std::optional<ClosedForm>& closed_form() const noexcept;
    const expr::Expression* expression() const noexcept;
    const GridSamples* grid_samples() const noexcept;

    std::string describe() const;

private:
    struct Impl;
    explicit FunctionDescriptor(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

}  // namespace rdsym
