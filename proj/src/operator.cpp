#include "rdsym/operator.hpp"

#include <vector>

namespace rdsym {

double SymmetryOperator::eta_u(double t, double x, double u, double) const {
    return u_slope(t, x) * u + u_shift(t, x);
}

double SymmetryOperator::eta_v(double t, double x, double u, double v) const {
    return v_cross(t, x) * u + v_slope(t, x) * v + v_shift(t, x);
}

std::string SymmetryOperator::describe() const {
    return "(" + time_coeff.describe() + ") d_t + (" + space_coeff.describe() + ") d_x + ((" +
           u_slope.describe() + ")*u + " + u_shift.describe() + ") d_u + ((" + v_cross.describe() +
           ")*u + (" + v_slope.describe() + ")*v + " + v_shift.describe() + ") d_v" +
           (manifold == Manifold::u ? " [Q(u)=0]" : " [Q(v)=0]");
}

FunctionDescriptor coefficient(const std::string& source, const std::map<std::string, double>& params) {
    std::vector<std::string> vars{"t", "x"};
    for (const auto& [name, value] : params) vars.push_back(name);
    return FunctionDescriptor::parsed(expr::Expression::parse(source, std::move(vars)).bind(params));
}

FunctionDescriptor zero_coefficient() { return FunctionDescriptor::constant(0.0, {"t", "x"}); }

SymmetryOperator zero_operator() {
    SymmetryOperator op;
    op.time_coeff = zero_coefficient();
    op.space_coeff = zero_coefficient();
    op.u_slope = zero_coefficient();
    op.u_shift = zero_coefficient();
    op.v_cross = zero_coefficient();
    op.v_slope = zero_coefficient();
    op.v_shift = zero_coefficient();
    return op;
}

}  // namespace rdsym
