#pragma once

#include "rdsym/operator.hpp"
#include "rdsym/rdsystem.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <utility>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdsym::detsys {

struct SamplePoint {
    double t = 0.0;
    double x = 0.0;
    double u = 0.0;
    double v = 0.0;
};

// n points uniform in [lo, hi]^4; t, u and v are redrawn while closer than
// `exclusion` to zero.
std::vector<SamplePoint> sample_box(std::size_t n, std::uint64_t seed, double lo = 0.1, double hi = 2.0,
                                    double exclusion = 0.1);

struct EquationResidual {
    std::string label;
    double max_abs = 0.0;
    double l2 = 0.0;  // sqrt of the sum of squares over the samples
    SamplePoint worst;
};

struct ResidualReport {
    std::vector<EquationResidual> equations;
    std::size_t samples = 0;
    double tolerance = 0.0;
    bool pass = true;

    const EquationResidual& equation(const std::string& label) const;
    double max_abs() const;
};

// Collects signed residual values per label and finalizes into a report.
class Accumulator {
public:
    Accumulator(std::vector<std::string> labels, double tolerance);
    void add(std::size_t equation, double value, const SamplePoint& at);
    void count_sample() { ++samples_; }
    ResidualReport finish() const;

private:
    std::vector<EquationResidual> rows_;
    std::vector<double> sum_sq_;
    std::size_t samples_ = 0;
    double tolerance_;
};

constexpr double kDefaultTolerance = 1e-6;

// Conditional symmetry of the first type with a nonzero time coefficient:
// labels xi-dependence, eta-linearity, eta2-u-coupling, d1-transport,
// d2-scaling, xi1-time, kinetics-u, kinetics-v.
ResidualReport residuals_first_type(const RDSystem& sys, const SymmetryOperator& op,
                                    std::span<const SamplePoint> samples, double tolerance = kDefaultTolerance);

// Vanishing time coefficient: labels xi1-dependence, eta-linearity,
// scaling-u, scaling-v, xi1-time, kinetics-u, kinetics-v.
ResidualReport residuals_xi0_zero(const RDSystem& sys, const SymmetryOperator& op,
                                  std::span<const SamplePoint> samples, double tolerance = kDefaultTolerance);

// Classical Lie symmetry: labels xi-dependence, eta-linearity, scaling-u,
// scaling-v, xi1-time-u, xi1-time-v, kinetics-u, kinetics-v.
ResidualReport residuals_lie(const RDSystem& sys, const SymmetryOperator& op, std::span<const SamplePoint> samples,
                             double tolerance = kDefaultTolerance);

struct LieEquivalence {
    bool equivalent = true;
    std::optional<SamplePoint> witness;
    std::string failed;  // "eta2_u" or "scaling"
    double value = 0.0;  // residual at the witness
};

// True iff eta2_u = 0 and (2 xi1_x - xi0_t) d1 + eta1 d1_u = 0 at every
// sample (absolute tolerance 1e-8).
LieEquivalence lie_equivalence_test(const RDSystem& sys, const SymmetryOperator& op,
                                    std::span<const SamplePoint> samples);

// Closed-form candidate solution (t, x) -> (u, v).
using Field = std::function<std::pair<double, double>(double, double)>;

struct Rect {
    double t0 = 0.0, t1 = 1.0;
    double x0 = 0.0, x1 = 1.0;
    std::size_t nt = 50, nx = 50;
};
std::vector<std::pair<double, double>> rect_points(const Rect& r);  // (t, x), t-major

// Residuals S1, S2 of the system on the field, with t and x derivatives by
// fourth-order central differences. Transformed form:
//   S1 = u_xx - d1(u) u_t - C1,  S2 = v_xx - d2(v) v_t - C2;
// divergence form: S1 = U_t - (D1(U) U_x)_x - F, likewise S2.
ResidualReport pde_residuals(const RDSystem& sys, const Field& field, const Rect& grid,
                             double tolerance = kDefaultTolerance);

nlohmann::json to_json(const SamplePoint& p);
nlohmann::json to_json(const ResidualReport& report);

}  // namespace rdsym::detsys
