#include "rdsym/reduction.hpp"

#include "rdsym/catalog.hpp"
#include "rdsym/error.hpp"
#include "rdsym/ode.hpp"

#include <cmath>
#include <sstream>

namespace rdsym::reduction {
namespace {

Ansatz::TimeFactor constant_factor(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

Ansatz::TimeFactor exponential_factor(double rate) {
    return {[rate](double t) { return std::exp(rate * t); }, [rate](double t) { return rate * std::exp(rate * t); }};
}

Ansatz::TimeFactor linear_factor(double rate) {
    return {[rate](double t) { return rate * t; }, [rate](double) { return rate; }};
}

double get(const std::map<std::string, double>& params, const char* name, int case_id) {
    const auto it = params.find(name);
    if (it == params.end()) {
        throw ValidationError("case " + std::to_string(case_id) + ": missing parameter '" + name + "'");
    }
    return it->second;
}

double positive_power(double base, double exponent, const char* what) {
    if (exponent == std::trunc(exponent) && std::fabs(exponent) <= 64.0) {
        if (base == 0.0 && exponent < 0.0) throw DomainError(std::string("zero ") + what + " under a negative power");
        return std::pow(base, exponent);
    }
    if (!(base > 0.0)) {
        throw DomainError(std::string("non-positive ") + what + " = " + std::to_string(base) +
                          " under a fractional power");
    }
    return std::pow(base, exponent);
}

void check_case(int case_id) {
    if (case_id < 1 || case_id > 4) {
        throw ValidationError("built-in reductions cover cases 1-4 only, got case " + std::to_string(case_id));
    }
}

}  // namespace

std::pair<double, double> Ansatz::lift(double phi, double psi, double t) const {
    return {scale_u.value(t) * phi + shift_u.value(t), scale_v.value(t) * psi + shift_v.value(t)};
}

std::pair<double, double> Ansatz::project(double u, double v, double t) const {
    return {(u - shift_u.value(t)) / scale_u.value(t), (v - shift_v.value(t)) / scale_v.value(t)};
}

std::pair<double, double> Ansatz::time_derivative(double phi, double psi, double t) const {
    return {scale_u.derivative(t) * phi + shift_u.derivative(t), scale_v.derivative(t) * psi + shift_v.derivative(t)};
}

Ansatz build_ansatz(int case_id, const std::map<std::string, double>& params) {
    check_case(case_id);
    Ansatz a;
    a.case_id = case_id;
    a.params = params;
    switch (case_id) {
        case 1: {
            const double alpha = get(params, "alpha", 1);
            const double beta = get(params, "beta", 1);
            if (alpha == 0.0 || beta == 0.0) throw ValidationError("restriction alpha*beta != 0 violated");
            a.scale_u = exponential_factor(1.0 / alpha);
            a.shift_u = constant_factor(0.0);
            a.scale_v = exponential_factor(1.0 / beta);
            a.shift_v = constant_factor(0.0);
            break;
        }
        case 2: {
            const double alpha = get(params, "alpha", 2);
            if (alpha == 0.0) throw ValidationError("restriction alpha != 0 violated");
            a.scale_u = exponential_factor(1.0);
            a.shift_u = constant_factor(0.0);
            a.scale_v = constant_factor(1.0);
            a.shift_v = linear_factor(alpha);
            break;
        }
        case 3: {
            const double alpha = get(params, "alpha", 3);
            if (alpha == 0.0) throw ValidationError("restriction alpha != 0 violated");
            a.scale_u = constant_factor(1.0);
            a.shift_u = linear_factor(1.0);
            a.scale_v = constant_factor(1.0);
            a.shift_v = linear_factor(alpha);
            break;
        }
        case 4: {
            const double beta = get(params, "beta", 4);
            if (beta == 0.0) throw ValidationError("restriction beta != 0 violated");
            a.scale_u = constant_factor(1.0);
            a.shift_u = linear_factor(1.0);
            a.scale_v = exponential_factor(1.0 / beta);
            a.shift_v = constant_factor(0.0);
            break;
        }
        default: break;
    }
    a.op = catalog::make_operator(case_id, params);
    return a;
}

double invariant(int case_id, const std::map<std::string, double>& params, double phi, double psi) {
    check_case(case_id);
    switch (case_id) {
        case 1:
            return positive_power(phi, -get(params, "alpha", 1), "phi") *
                   positive_power(psi, get(params, "beta", 1), "psi");
        case 2: return positive_power(phi, -get(params, "alpha", 2), "phi") * std::exp(psi);
        case 3: return psi - get(params, "alpha", 3) * phi;
        default: return positive_power(psi, get(params, "beta", 4), "psi") * std::exp(-phi);
    }
}

ReducedRhs reduced_rhs(int case_id, const FunctionDescriptor& f, const FunctionDescriptor& g,
                       const std::map<std::string, double>& params) {
    check_case(case_id);
    if (f.arity() != 1 || g.arity() != 1) throw ValidationError("f and g must be functions of one variable");
    (void)invariant(case_id, params, 1.0, 1.0);  // parameter presence
    return [case_id, f, g, params](double, double phi, double psi) -> std::array<double, 2> {
        const double w = invariant(case_id, params, phi, psi);
        const double fw = f(w);
        const double gw = g(w);
        switch (case_id) {
            case 1: return {phi * fw, psi * gw};
            case 2: return {phi * fw, gw};
            case 3: return {fw, gw};
            default: return {fw, psi * gw};
        }
    };
}

std::vector<double> second_differences(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    if (n < 7) throw ValidationError("profile needs at least seven nodes for fourth-order differences");
    std::vector<double> d(n);
    const double s = 12.0 * h * h;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / s;
    }
    // One-sided fourth-order stencils (six points).
    auto forward = [&](std::size_t i) {
        return (45.0 * y[i] - 154.0 * y[i + 1] + 214.0 * y[i + 2] - 156.0 * y[i + 3] + 61.0 * y[i + 4] -
                10.0 * y[i + 5]) /
               s;
    };
    auto backward = [&](std::size_t i) {
        return (45.0 * y[i] - 154.0 * y[i - 1] + 214.0 * y[i - 2] - 156.0 * y[i - 3] + 61.0 * y[i - 4] -
                10.0 * y[i - 5]) /
               s;
    };
    d[0] = forward(0);
    d[1] = forward(1);
    d[n - 1] = backward(n - 1);
    d[n - 2] = backward(n - 2);
    return d;
}

namespace {

FunctionDescriptor profile_function(const ReducedProfile& p, const std::vector<double>& value,
                                    const std::vector<double>& first) {
    GridSamples g;
    g.x0 = p.x0;
    g.step = p.step;
    g.value = value;
    g.first = first;
    g.second = second_differences(value, p.step);
    return FunctionDescriptor::grid(std::move(g), "x");
}

}  // namespace

FunctionDescriptor ReducedProfile::phi_function() const { return profile_function(*this, phi, dphi); }
FunctionDescriptor ReducedProfile::psi_function() const { return profile_function(*this, psi, dpsi); }

std::string ReducedProfile::to_csv() const {
    std::ostringstream s;
    s.precision(17);
    s << "x,phi,psi,dphi,dpsi\n";
    for (std::size_t i = 0; i < phi.size(); ++i) {
        s << x0 + step * static_cast<double>(i) << ',' << phi[i] << ',' << psi[i] << ',' << dphi[i] << ',' << dpsi[i]
          << '\n';
    }
    return s.str();
}

ReducedProfile integrate_reduced(const ReducedRhs& rhs, double phi0, double dphi0, double psi0, double dpsi0,
                                 std::pair<double, double> x_range, double step, int case_id,
                                 const std::map<std::string, double>& params) {
    if (!(step > 0.0)) throw ValidationError("integration step must be positive");
    if (!(x_range.first < x_range.second)) throw ValidationError("x range must be increasing");
    auto first_order = [&rhs](double x, const std::array<double, 4>& y) {
        const auto acc = rhs(x, y[0], y[2]);
        return std::array<double, 4>{y[1], acc[0], y[3], acc[1]};
    };
    const auto traj = ode::rk4<4>(first_order, x_range.first, {phi0, dphi0, psi0, dpsi0}, x_range.second, step);
    ReducedProfile p;
    p.x0 = x_range.first;
    p.step = traj.x.size() > 1 ? (x_range.second - x_range.first) / static_cast<double>(traj.x.size() - 1) : step;
    for (const auto& y : traj.y) {
        p.phi.push_back(y[0]);
        p.dphi.push_back(y[1]);
        p.psi.push_back(y[2]);
        p.dpsi.push_back(y[3]);
        if (case_id >= 1 && case_id <= 4) p.omega.push_back(invariant(case_id, params, y[0], y[2]));
    }
    return p;
}

detsys::ResidualReport lift_and_check(const Ansatz& ansatz, const ReducedProfile& profile, const detsys::Rect& grid,
                                      const RDSystem& sys, const std::optional<SymmetryOperator>& op_opt,
                                      double tolerance) {
    validate_shape(sys);
    if (sys.form != Form::transformed) throw ValidationError("lift_and_check expects the transformed form");
    const double slack = 1e-12 * std::fmax(1.0, std::fabs(profile.x1()));
    if (grid.x0 < profile.x0 - slack || grid.x1 > profile.x1() + slack) {
        throw ValidationError("check grid x-range lies outside the profile domain");
    }
    const SymmetryOperator& op = op_opt ? *op_opt : ansatz.op;
    const auto phi = profile.phi_function();
    const auto psi = profile.psi_function();
    detsys::Accumulator acc({"S1", "S2", "Q(u)", "Q(v)"}, tolerance);
    for (auto [t, x] : detsys::rect_points(grid)) {
        x = std::fmin(std::fmax(x, profile.x0), profile.x1());
        const double ph = phi(x), ps = psi(x);
        const auto [u, v] = ansatz.lift(ph, ps, t);
        const auto [u_t, v_t] = ansatz.time_derivative(ph, ps, t);
        const auto [au, av] = ansatz.x_factor(t);
        const double u_x = au * phi.derivative(x, 1), v_x = av * psi.derivative(x, 1);
        const double u_xx = au * phi.derivative(x, 2), v_xx = av * psi.derivative(x, 2);
        const detsys::SamplePoint at{t, x, u, v};
        acc.add(0, u_xx - sys.diffusivity_u(u) * u_t - sys.kinetics_u(u, v), at);
        acc.add(1, v_xx - sys.diffusivity_v(v) * v_t - sys.kinetics_v(u, v), at);
        const double xi0 = op.time_coeff(t, x), xi1 = op.space_coeff(t, x);
        acc.add(2, xi0 * u_t + xi1 * u_x - op.eta_u(t, x, u, v), at);
        acc.add(3, xi0 * v_t + xi1 * v_x - op.eta_v(t, x, u, v), at);
        acc.count_sample();
    }
    return acc.finish();
}

}  // namespace rdsym::reduction
