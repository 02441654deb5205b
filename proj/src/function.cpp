#include "rdsym/function.hpp"

#include "rdsym/error.hpp"
#include "rdsym/numdiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdsym {

struct FunctionDescriptor::Impl {
    Kind kind = Kind::constant;
    std::vector<std::string> vars;
    std::optional<ClosedForm> closed;
    std::optional<expr::Expression> expression;
    std::optional<GridSamples> samples;
    Callable callable;
    std::string description;
};

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double checked(double value, const char* what) {
    if (!std::isfinite(value)) throw DomainError(std::string(what) + " is not finite");
    return value;
}

double closed_value(const FunctionDescriptor::ClosedForm& c, double s, int order) {
    using Kind = FunctionDescriptor::Kind;
    switch (c.tag) {
        case Kind::power: {
            const double beta = c.parameter;
            if (s < 0.0 && beta != std::trunc(beta)) {
                throw DomainError("power law with fractional exponent at negative argument " +
                                  format_number(s));
            }
            double factor = c.coefficient;
            for (int k = 0; k < order; ++k) factor *= (beta - k);
            if (factor == 0.0) return 0.0;
            return checked(factor * std::pow(s, beta - order), "power law");
        }
        case Kind::exponential:
            return checked(c.coefficient * std::pow(c.parameter, order) * std::exp(c.parameter * s),
                           "exponential");
        case Kind::affine:
            if (order == 0) return c.offset + c.coefficient * s;
            return order == 1 ? c.coefficient : 0.0;
        default:
            return order == 0 ? c.coefficient : 0.0;
    }
}

// Quintic Hermite interpolation on cell [x_j, x_j + h] in local t in [0,1].
double grid_value(const GridSamples& g, double x, int order) {
    const std::size_t n = g.value.size();
    const double x1 = g.x1();
    const double slack = 1e-9 * g.step;
    if (!(x >= g.x0 - slack && x <= x1 + slack)) {
        throw DomainError("grid function evaluated at x = " + format_number(x) + " outside [" +
                          format_number(g.x0) + ", " + format_number(x1) + "]");
    }
    const double h = g.step;
    const double pos = std::clamp((x - g.x0) / h, 0.0, static_cast<double>(n - 1));
    std::size_t j = static_cast<std::size_t>(pos);
    if (j >= n - 1) j = n - 2;
    const double t = pos - static_cast<double>(j);

    const double c0 = g.value[j];
    const double c1 = h * g.first[j];
    const double c2 = 0.5 * h * h * g.second[j];
    const double Y = g.value[j + 1] - (c0 + c1 + c2);
    const double Yp = h * g.first[j + 1] - (c1 + 2 * c2);
    const double Ypp = h * h * g.second[j + 1] - 2 * c2;
    const double c3 = 10 * Y - 4 * Yp + 0.5 * Ypp;
    const double c4 = -15 * Y + 7 * Yp - Ypp;
    const double c5 = 6 * Y - 3 * Yp + 0.5 * Ypp;

    switch (order) {
        case 0:
            return c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        case 1:
            return (c1 + t * (2 * c2 + t * (3 * c3 + t * (4 * c4 + t * 5 * c5)))) / h;
        case 2:
            return (2 * c2 + t * (6 * c3 + t * (12 * c4 + t * 20 * c5))) / (h * h);
        case 3:
            return (6 * c3 + t * (24 * c4 + t * 60 * c5)) / (h * h * h);
        default:
            throw ValidationError("grid derivative order must be 0..3");
    }
}

}  // namespace

FunctionDescriptor::FunctionDescriptor() : FunctionDescriptor(constant(0.0)) {}

FunctionDescriptor::FunctionDescriptor(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

FunctionDescriptor FunctionDescriptor::power(double coefficient, double exponent, std::string var) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::power;
    impl->vars = {std::move(var)};
    impl->closed = ClosedForm{Kind::power, coefficient, exponent, 0.0};
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::exponential(double coefficient, double rate, std::string var) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::exponential;
    impl->vars = {std::move(var)};
    impl->closed = ClosedForm{Kind::exponential, coefficient, rate, 0.0};
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::affine(double intercept, double slope, std::string var) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::affine;
    impl->vars = {std::move(var)};
    impl->closed = ClosedForm{Kind::affine, slope, 0.0, intercept};
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::constant(double value, std::vector<std::string> vars) {
    if (vars.empty() || vars.size() > 2) throw ValidationError("descriptor arity must be 1 or 2");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::constant;
    impl->vars = std::move(vars);
    impl->closed = ClosedForm{Kind::constant, value, 0.0, 0.0};
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::parsed(expr::Expression expression) {
    if (expression.arity() == 0 || expression.arity() > 4) {
        throw ValidationError("parsed descriptor needs 1 to 4 variables");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::parsed;
    impl->vars = expression.variables();
    impl->expression = std::move(expression);
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::parse(std::string_view source, std::vector<std::string> vars) {
    return parsed(expr::Expression::parse(source, std::move(vars)));
}

FunctionDescriptor FunctionDescriptor::grid(GridSamples samples, std::string var) {
    const std::size_t n = samples.value.size();
    if (n < 2 || samples.first.size() != n || samples.second.size() != n) {
        throw ValidationError("grid function needs at least two nodes with value, first and second derivative");
    }
    if (!(samples.step > 0.0)) throw ValidationError("grid step must be positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::grid;
    impl->vars = {std::move(var)};
    impl->samples = std::move(samples);
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor FunctionDescriptor::composite(std::vector<std::string> vars, Callable fn,
                                                 std::string description) {
    if (vars.empty() || vars.size() > 4) throw ValidationError("composite descriptor needs 1 to 4 variables");
    if (!fn) throw ValidationError("composite descriptor needs a callable");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::composite;
    impl->vars = std::move(vars);
    impl->callable = std::move(fn);
    impl->description = std::move(description);
    return FunctionDescriptor(std::move(impl));
}

FunctionDescriptor::Kind FunctionDescriptor::kind() const noexcept { return impl_->kind; }

std::size_t FunctionDescriptor::arity() const noexcept { return impl_->vars.size(); }

const std::vector<std::string>& FunctionDescriptor::variables() const noexcept { return impl_->vars; }

std::size_t FunctionDescriptor::index_of(std::string_view var) const {
    const auto it = std::find(impl_->vars.begin(), impl_->vars.end(), var);
    if (it == impl_->vars.end()) throw ValidationError("function has no variable '" + std::string(var) + "'");
    return static_cast<std::size_t>(it - impl_->vars.begin());
}

double FunctionDescriptor::operator()(std::span<const double> at) const {
    if (at.size() != impl_->vars.size()) {
        throw ValidationError("function of " + std::to_string(impl_->vars.size()) +
                              " variable(s) called with " + std::to_string(at.size()));
    }
    switch (impl_->kind) {
        case Kind::parsed: return impl_->expression->evaluate(at);
        case Kind::grid: return grid_value(*impl_->samples, at[0], 0);
        case Kind::composite: return checked(impl_->callable(at), "function value");
        case Kind::constant: return impl_->closed->coefficient;
        default: return closed_value(*impl_->closed, at[0], 0);
    }
}

double FunctionDescriptor::operator()(double s) const {
    const double at[1] = {s};
    return (*this)(std::span<const double>(at, 1));
}

double FunctionDescriptor::operator()(double a, double b) const {
    const double at[2] = {a, b};
    return (*this)(std::span<const double>(at, 2));
}

bool FunctionDescriptor::analytic_derivatives() const noexcept {
    return impl_->kind != Kind::parsed && impl_->kind != Kind::composite;
}

double FunctionDescriptor::derivative(std::span<const double> at, std::size_t wrt, int order) const {
    if (wrt >= impl_->vars.size()) throw ValidationError("derivative variable index out of range");
    if (at.size() != impl_->vars.size()) throw ValidationError("derivative point has wrong dimension");
    if (order == 0) return (*this)(at);
    if (order < 0 || order > 2) throw ValidationError("derivative order must be 1 or 2");
    switch (impl_->kind) {
        case Kind::grid: return grid_value(*impl_->samples, at[0], order);
        case Kind::constant: return 0.0;
        case Kind::power:
        case Kind::exponential:
        case Kind::affine: return closed_value(*impl_->closed, at[0], order);
        default: break;
    }
    std::vector<double> point(at.begin(), at.end());
    auto slice = [&](double s) {
        point[wrt] = s;
        return (*this)(std::span<const double>(point));
    };
    return numdiff::central(slice, at[wrt], order);
}

double FunctionDescriptor::derivative(double s, int order) const {
    const double at[1] = {s};
    return derivative(std::span<const double>(at, 1), 0, order);
}

void FunctionDescriptor::evaluate_batch(std::span<const std::span<const double>> columns,
                                        std::span<double> out) const {
    if (columns.size() != impl_->vars.size()) throw ValidationError("batch has wrong number of columns");
    if (impl_->kind == Kind::parsed) {
        impl_->expression->evaluate_batch(columns, out);
        return;
    }
    std::vector<double> point(columns.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k) point[k] = columns[k][i];
        out[i] = (*this)(std::span<const double>(point));
    }
}

const std::optional<FunctionDescriptor::ClosedForm>& FunctionDescriptor::closed_form() const noexcept {
    return impl_->closed;
}

const expr::Expression* FunctionDescriptor::expression() const noexcept {
    return impl_->expression ? &*impl_->expression : nullptr;
}

const GridSamples* FunctionDescriptor::grid_samples() const noexcept {
    return impl_->samples ? &*impl_->samples : nullptr;
}

std::string FunctionDescriptor::describe() const {
    const std::string& s = impl_->vars.front();
    switch (impl_->kind) {
        case Kind::power:
            return format_number(impl_->closed->coefficient) + "*" + s + "^" +
                   format_number(impl_->closed->parameter);
        case Kind::exponential:
            return format_number(impl_->closed->coefficient) + "*exp(" +
                   format_number(impl_->closed->parameter) + "*" + s + ")";
        case Kind::affine:
            return format_number(impl_->closed->offset) + " + " +
                   format_number(impl_->closed->coefficient) + "*" + s;
        case Kind::constant: return format_number(impl_->closed->coefficient);
        case Kind::parsed: return impl_->expression->to_string();
        case Kind::grid: {
            const auto& g = *impl_->samples;
            return "grid(" + s + " in [" + format_number(g.x0) + ", " + format_number(g.x1()) + "], " +
                   std::to_string(g.value.size()) + " nodes)";
        }
        case Kind::composite: return impl_->description;
    }
    return {};
}

}  // namespace rdsym
