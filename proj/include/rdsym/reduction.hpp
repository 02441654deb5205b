#pragma once

#include "rdsym/detsys.hpp"
#include "rdsym/function.hpp"
#include "rdsym/operator.hpp"
#include "rdsym/rdsystem.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rdsym::reduction {

// u = A_u(t) phi(x) + B_u(t), v = A_v(t) psi(x) + B_v(t). Every built-in
// ansatz has this shape; custom ones can be assembled directly.
struct Ansatz {
    struct TimeFactor {
        std::function<double(double)> value;
        std::function<double(double)> derivative;
    };
    int case_id = 0;  // 0 for a user-assembled ansatz
    std::map<std::string, double> params;
    TimeFactor scale_u, shift_u, scale_v, shift_v;
    SymmetryOperator op;  // the generating operator

    std::pair<double, double> lift(double phi, double psi, double t) const;
    std::pair<double, double> project(double u, double v, double t) const;
    // (u_t, v_t) at fixed x.
    std::pair<double, double> time_derivative(double phi, double psi, double t) const;
    std::pair<double, double> x_factor(double t) const { return {scale_u.value(t), scale_v.value(t)}; }
};

// Built-in ansaetze for cases 1-4 of the catalog:
//   1: u = phi e^(t/alpha), v = psi e^(t/beta)
//   2: u = phi e^t,         v = psi + alpha t
//   3: u = phi + t,         v = psi + alpha t
//   4: u = phi + t,         v = psi e^(t/beta)
Ansatz build_ansatz(int case_id, const std::map<std::string, double>& params);

// (x, phi, psi) -> (phi'', psi'').
using ReducedRhs = std::function<std::array<double, 2>(double, double, double)>;

// The reduced pair for case 1-4 with user functions f, g of one variable:
//   1: phi f(w), psi g(w),  w = phi^-alpha psi^beta
//   2: phi f(w), g(w),      w = phi^-alpha e^psi
//   3: f(w), g(w),          w = psi - alpha phi
//   4: f(w), psi g(w),      w = psi^beta e^-phi
ReducedRhs reduced_rhs(int case_id, const FunctionDescriptor& f, const FunctionDescriptor& g,
                       const std::map<std::string, double>& params);
// The invariant w of the case at (phi, psi).
double invariant(int case_id, const std::map<std::string, double>& params, double phi, double psi);

struct ReducedProfile {
    double x0 = 0.0;
    double step = 0.0;
    std::vector<double> phi, psi, dphi, dpsi;
    std::vector<double> omega;  // invariant at the nodes; empty for custom rhs

    double x1() const { return x0 + step * static_cast<double>(phi.size() - 1); }
    std::size_t size() const { return phi.size(); }
    // Grid descriptors of phi and psi. Second derivatives at the nodes come
    // from fourth-order differences of the node values (one-sided at the ends).
    FunctionDescriptor phi_function() const;
    FunctionDescriptor psi_function() const;
    std::string to_csv() const;
};

// Classical RK4 on the first-order form over [x_range.first, x_range.second].
ReducedProfile integrate_reduced(const ReducedRhs& rhs, double phi0, double dphi0, double psi0, double dpsi0,
                                 std::pair<double, double> x_range, double step, int case_id = 0,
                                 const std::map<std::string, double>& params = {});

// Lifts the profile through the ansatz on the grid and reports S1, S2 of
// the transformed system together with Q(u) = xi0 u_t + xi1 u_x - eta1 and
// Q(v) likewise. Uses `op` when given, else the ansatz's own operator.
detsys::ResidualReport lift_and_check(const Ansatz& ansatz, const ReducedProfile& profile, const detsys::Rect& grid,
                                      const RDSystem& sys, const std::optional<SymmetryOperator>& op = std::nullopt,
                                      double tolerance = 1e-4);

// Fourth-order differences of node values: second derivatives at every node.
std::vector<double> second_differences(const std::vector<double>& values, double step);

}  // namespace rdsym::reduction
