#pragma once

#include "rdsym/function.hpp"
#include "rdsym/rdsystem.hpp"

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace rdsym::linfam {

// Coupling matrix of phi'' = l11 phi + l12 psi, psi'' = l21 phi + l22 psi.
struct Matrix {
    double l11 = 0.0, l12 = 0.0, l21 = 0.0, l22 = 0.0;

    double trace() const { return l11 + l22; }
    double det() const { return l11 * l22 - l12 * l21; }
    double discriminant() const { return (l11 - l22) * (l11 - l22) + 4.0 * l12 * l21; }
    double norm() const;
};

// Branch of the general solution, 1..9. Degenerate determinant: 1 (zero
// trace), 2 (negative), 3 (positive). Zero discriminant: 4 (positive
// trace), 5 (negative). Positive discriminant: 6 (trace > sqrt), 7 (trace^2 <
// discriminant), 8 (trace < -sqrt). Negative discriminant: 9.
int classify(const Matrix& m, std::optional<double> tol = std::nullopt);
double default_tolerance(const Matrix& m);

// One term c * Re or Im of x^n exp(rate x).
struct BasisTerm {
    std::complex<double> rate;
    int power = 0;
    bool imaginary = false;  // Im instead of Re
    double weight = 1.0;
};

// Value and derivatives 0..4 at x.
using Jet4 = std::array<double, 5>;
Jet4 evaluate(const std::vector<BasisTerm>& terms, double x);

struct Branch {
    int id = 0;
    // h, h-/h+, h1/h2 as they apply; unused entries zero.
    double h = 0.0, h_minus = 0.0, h_plus = 0.0, h1 = 0.0, h2 = 0.0, delta = 0.0;
};

class LinearFamily {
public:
    // Throws ValidationError when both off-diagonal entries vanish.
    LinearFamily(Matrix m, std::array<double, 4> c, std::optional<double> tol = std::nullopt);

    const Matrix& matrix() const { return m_; }
    const std::array<double, 4>& constants() const { return c_; }
    const Branch& branch() const { return branch_; }
    int case_id() const { return branch_.id; }
    // True when the roles of phi and psi were exchanged because l12 = 0.
    bool swapped() const { return swapped_; }

    // (phi, psi) and their derivatives up to order 2 (psi) / 4 (phi).
    struct Profile {
        Jet4 phi{};
        Jet4 psi{};  // entries 3, 4 are left zero
    };
    Profile profile(double x) const;
    std::pair<double, double> eval(double x) const;

    // The fourth-order equation's basis expansion for the leading component.
    const std::vector<BasisTerm>& basis() const { return terms_; }

private:
    Matrix m_;
    std::array<double, 4> c_;
    Branch branch_;
    bool swapped_ = false;
    std::vector<BasisTerm> terms_;
};

// u = phi(x) exp(t/alpha), v = psi(x) exp(t/alpha) solves
//   u_xx = d1(u) u_t + l11 u + l12 v - u d1(u)/alpha
//   v_xx = v^alpha v_t + l21 u + l22 v - v^(alpha+1)/alpha
// for any d1.
class LiftedFamily {
public:
    LiftedFamily(LinearFamily family, double alpha);
    std::pair<double, double> operator()(double t, double x) const;
    const LinearFamily& family() const { return family_; }
    double alpha() const { return alpha_; }
    // The transformed-form system above for a given d1 of u.
    RDSystem system(const FunctionDescriptor& d1) const;

private:
    LinearFamily family_;
    double alpha_;
};

LiftedFamily lift_family(const LinearFamily& family, double alpha);

// Power-diffusivity application: U_t = (U^k U_x)_x - (l+1)/(l(k+1)) U +
// s11 U^(k+1) + s12 V^(l+1), V_t = (V^l V_x)_x - V/l + s21 U^(k+1) +
// s22 V^(l+1), with s the starred kinetics.
struct PowerApplication {
    double k = 1.0;
    double l = 1.0;
    Matrix star;
    double C1 = 0.0, C2 = 0.0, C4 = 0.0;

    // Throws ValidationError on k or l = -1, l = 0, s12 = 0, non-positive
    // h^2 or a non-singular starred matrix.
    void validate(double tol = 1e-12) const;
    double h() const;
    // Unstarred coupling matrix and the exponent alpha of the lifted family.
    Matrix matrix() const;
    double alpha() const;
    double gamma() const;
    RDSystem system() const;  // divergence form
};

// Inner profiles phi, psi (before the fractional powers).
std::pair<double, double> power_profiles(const PowerApplication& app, double x);
// (U, V); throws DomainError where a base under a fractional power is negative.
std::pair<double, double> power_solution(const PowerApplication& app, double t, double x);
// (U_x, V_x) analytically.
std::pair<double, double> power_solution_dx(const PowerApplication& app, double t, double x);

struct BvpReport {
    double length = 0.0;  // j pi / h
    double flux_left_u = 0.0, flux_left_v = 0.0;
    double flux_right_u = 0.0, flux_right_v = 0.0;
    double min_phi = 0.0, min_psi = 0.0;
    double min_u = 0.0, min_v = 0.0;  // NaN when a base is negative
    bool positive = false;
    bool decay_monotone = false;
    std::vector<double> sup_times;
    std::vector<double> sup_norms;  // max over x of max(U, V)
};

BvpReport check_bvp(const PowerApplication& app, int j, double horizon = 1.0, std::size_t time_samples = 21,
                    std::size_t space_samples = 2001);

}  // namespace rdsym::linfam
