#pragma once

#include "rdsym/function.hpp"

#include <map>
#include <string>

namespace rdsym {

enum class Manifold {
    u,  // invariance required on S1 = S2 = 0 together with Q(u) = 0
    v,  // ... together with Q(v) = 0
};

// Q = xi0 d_t + xi1 d_x + eta1 d_u + eta2 d_v with
//   eta1 = u_slope * u + u_shift
//   eta2 = v_cross * u + v_slope * v + v_shift
// Every coefficient is a function of (t, x).
struct SymmetryOperator {
    FunctionDescriptor time_coeff;
    FunctionDescriptor space_coeff;
    FunctionDescriptor u_slope;
    FunctionDescriptor u_shift;
    FunctionDescriptor v_cross;
    FunctionDescriptor v_slope;
    FunctionDescriptor v_shift;
    Manifold manifold = Manifold::u;

    double eta_u(double t, double x, double u, double v) const;
    double eta_v(double t, double x, double u, double v) const;
    std::string describe() const;
};

// Coefficient of (t, x) from text with named parameters substituted.
FunctionDescriptor coefficient(const std::string& source, const std::map<std::string, double>& params = {});
FunctionDescriptor zero_coefficient();

// The trivial operator with every coefficient zero.
SymmetryOperator zero_operator();

}  // namespace rdsym
