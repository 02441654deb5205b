#include "rdsym/linfam.hpp"

#include "rdsym/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rdsym::linfam {
namespace {

double root(double v) { return std::sqrt(std::fmax(v, 0.0)); }

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << "(" << v << ")";
    return s.str();
}

Matrix transposed_roles(const Matrix& m) { return {m.l22, m.l21, m.l12, m.l11}; }

std::vector<BasisTerm> basis_for(const Branch& b, const std::array<double, 4>& c) {
    using cx = std::complex<double>;
    auto re = [](cx rate, double w, int n = 0) { return BasisTerm{rate, n, false, w}; };
    auto im = [](cx rate, double w, int n = 0) { return BasisTerm{rate, n, true, w}; };
    switch (b.id) {
        case 1: return {re(0.0, c[0]), re(0.0, c[1], 1), re(0.0, c[2], 2), re(0.0, c[3], 3)};
        case 2: return {re({0.0, b.h}, c[0]), im({0.0, b.h}, c[1]), re(0.0, c[2], 1), re(0.0, c[3])};
        case 3: return {re(b.h, c[0]), re(-b.h, c[1]), re(0.0, c[2], 1), re(0.0, c[3])};
        case 4: return {re(b.h, c[0]), re(b.h, c[1], 1), re(-b.h, c[2]), re(-b.h, c[3], 1)};
        case 5: return {re({0.0, b.h}, c[0]), re({0.0, b.h}, c[1], 1), im({0.0, b.h}, c[2]), im({0.0, b.h}, c[3], 1)};
        case 6: return {re(b.h_minus, c[0]), re(-b.h_minus, c[1]), re(b.h_plus, c[2]), re(-b.h_plus, c[3])};
        case 7: return {re({0.0, b.h1}, c[0]), im({0.0, b.h1}, c[1]), re(b.h2, c[2]), re(-b.h2, c[3])};
        case 8:
            return {re({0.0, b.h_minus}, c[0]), im({0.0, b.h_minus}, c[1]), re({0.0, b.h_plus}, c[2]),
                    im({0.0, b.h_plus}, c[3])};
        case 9: return {re({b.h1, b.h2}, c[0]), im({b.h1, b.h2}, c[1]), re({-b.h1, b.h2}, c[2]), im({-b.h1, b.h2}, c[3])};
        default: throw RuntimeFailure("unknown branch");
    }
}

Branch branch_for(const Matrix& m, int id) {
    Branch b;
    b.id = id;
    const double s = m.trace();
    const double sd = root(m.discriminant());
    switch (id) {
        case 2: b.h = root(-s); break;
        case 3: b.h = root(s); break;
        case 4: b.h = root(s / 2.0); break;
        case 5: b.h = root(-s / 2.0); break;
        case 6:
            b.h_minus = root((s - sd) / 2.0);
            b.h_plus = root((s + sd) / 2.0);
            break;
        case 7:
            b.h1 = root((sd - s) / 2.0);
            b.h2 = root((s + sd) / 2.0);
            break;
        case 8:
            b.h_minus = root(-(s - sd) / 2.0);
            b.h_plus = root(-(s + sd) / 2.0);
            break;
        case 9:
            b.delta = 2.0 * root(m.det());
            b.h1 = 0.5 * root(b.delta + s);
            b.h2 = 0.5 * root(b.delta - s);
            break;
        default: break;
    }
    return b;
}

}  // namespace

double Matrix::norm() const {
    return std::max({std::fabs(l11), std::fabs(l12), std::fabs(l21), std::fabs(l22)});
}

double default_tolerance(const Matrix& m) { return 1e-9 * (1.0 + m.norm()); }

int classify(const Matrix& m, std::optional<double> tol_opt) {
    if (m.l12 == 0.0 && m.l21 == 0.0) {
        throw ValidationError("classify requires l12 != 0 or l21 != 0 (the system decouples otherwise)");
    }
    for (double v : {m.l11, m.l12, m.l21, m.l22}) {
        if (!std::isfinite(v)) throw ValidationError("coupling matrix entries must be finite");
    }
    const double tol = tol_opt.value_or(default_tolerance(m));
    const double s = m.trace();
    const double det = m.det();
    const double disc = m.discriminant();
    // Degenerate quantities are compared on the scale they carry.
    const double scale2 = tol * (1.0 + m.norm());
    if (std::fabs(det) <= scale2) {
        if (std::fabs(s) <= tol) return 1;
        return s < 0.0 ? 2 : 3;
    }
    if (std::fabs(disc) <= scale2) return s > 0.0 ? 4 : 5;
    if (disc > 0.0) {
        const double sd = std::sqrt(disc);
        if (s > sd) return 6;
        if (s < -sd) return 8;
        if (s * s < disc) return 7;
        throw RuntimeFailure("classification reached trace^2 = discriminant with nonzero determinant");
    }
    return 9;
}

Jet4 evaluate(const std::vector<BasisTerm>& terms, double x) {
    Jet4 out{};
    for (const auto& term : terms) {
        if (term.weight == 0.0) continue;
        const std::complex<double> e = std::exp(term.rate * x);
        const int n = term.power;
        for (int k = 0; k <= 4; ++k) {
            // d^k/dx^k of x^n e^{cx} by Leibniz.
            std::complex<double> acc = 0.0;
            double binom = 1.0;
            for (int j = 0; j <= std::min(k, n); ++j) {
                double falling = 1.0;
                for (int i = 0; i < j; ++i) falling *= static_cast<double>(n - i);
                acc += binom * falling * std::pow(x, n - j) * std::pow(term.rate, k - j);
                binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
            }
            acc *= e;
            out[static_cast<std::size_t>(k)] += term.weight * (term.imaginary ? acc.imag() : acc.real());
        }
    }
    return out;
}

LinearFamily::LinearFamily(Matrix m, std::array<double, 4> c, std::optional<double> tol) : m_(m), c_(c) {
    const int id = classify(m, tol);
    swapped_ = m.l12 == 0.0;
    const Matrix lead = swapped_ ? transposed_roles(m) : m;
    branch_ = branch_for(lead, id);
    terms_ = basis_for(branch_, c_);
}

LinearFamily::Profile LinearFamily::profile(double x) const {
    const Jet4 lead = evaluate(terms_, x);
    const double a = swapped_ ? m_.l22 : m_.l11;
    const double b = swapped_ ? m_.l21 : m_.l12;
    Jet4 other{};
    other[0] = (lead[2] - a * lead[0]) / b;
    other[1] = (lead[3] - a * lead[1]) / b;
    other[2] = (lead[4] - a * lead[2]) / b;
    Profile p;
    p.phi = swapped_ ? other : lead;
    p.psi = swapped_ ? lead : other;
    return p;
}

std::pair<double, double> LinearFamily::eval(double x) const {
    const auto p = profile(x);
    return {p.phi[0], p.psi[0]};
}

LiftedFamily::LiftedFamily(LinearFamily family, double alpha) : family_(std::move(family)), alpha_(alpha) {
    if (alpha == 0.0 || !std::isfinite(alpha)) throw ValidationError("lifted family needs alpha != 0");
}

std::pair<double, double> LiftedFamily::operator()(double t, double x) const {
    const auto [phi, psi] = family_.eval(x);
    const double e = std::exp(t / alpha_);
    return {phi * e, psi * e};
}

RDSystem LiftedFamily::system(const FunctionDescriptor& d1) const {
    const Matrix m = family_.matrix();
    const double a = alpha_;
    RDSystem s;
    s.form = Form::transformed;
    s.diffusivity_u = d1;
    s.diffusivity_v = FunctionDescriptor::power(1.0, a, "v");
    s.kinetics_u = FunctionDescriptor::composite(
        {"u", "v"}, [m, a, d1](std::span<const double> p) { return m.l11 * p[0] + m.l12 * p[1] - p[0] * d1(p[0]) / a; },
        "l11*u + l12*v - u*d1(u)/alpha");
    s.kinetics_v = FunctionDescriptor::composite(
        {"u", "v"},
        [m, a](std::span<const double> p) {
            if (p[1] < 0.0) throw DomainError("v^(alpha+1) with negative v");
            return m.l21 * p[0] + m.l22 * p[1] - std::pow(p[1], a + 1.0) / a;
        },
        "l21*u + l22*v - v^(alpha+1)/alpha");
    return s;
}

LiftedFamily lift_family(const LinearFamily& family, double alpha) { return LiftedFamily(family, alpha); }

void PowerApplication::validate(double tol) const {
    if (k == -1.0 || l == -1.0) throw ValidationError("power application needs k != -1 and l != -1");
    if (l == 0.0) throw ValidationError("power application needs l != 0");
    if (star.l12 == 0.0) throw ValidationError("power application needs lambda*12 != 0");
    const double h2 = (k + 1.0) * star.l11 + (l + 1.0) * star.l22;
    if (!(h2 > 0.0)) throw ValidationError("power application needs (k+1)*lambda*11 + (l+1)*lambda*22 > 0");
    if (std::fabs(star.det()) > tol * (1.0 + star.norm() * star.norm())) {
        throw ValidationError("power application needs lambda*11*lambda*22 - lambda*12*lambda*21 = 0");
    }
}

double PowerApplication::h() const { return std::sqrt((k + 1.0) * star.l11 + (l + 1.0) * star.l22); }

Matrix PowerApplication::matrix() const {
    return {-(k + 1.0) * star.l11, -(k + 1.0) * star.l12, -(l + 1.0) * star.l21, -(l + 1.0) * star.l22};
}

double PowerApplication::alpha() const { return -l / (l + 1.0); }
double PowerApplication::gamma() const { return -k / (k + 1.0); }

RDSystem PowerApplication::system() const {
    const double sink = (l + 1.0) / (l * (k + 1.0));
    RDSystem s;
    s.form = Form::divergence;
    s.diffusivity_u = FunctionDescriptor::power(1.0, k, "U");
    s.diffusivity_v = FunctionDescriptor::power(1.0, l, "V");
    s.kinetics_u = FunctionDescriptor::parse("-" + num(sink) + "*U + " + num(star.l11) + "*U^" + num(k + 1.0) + " + " +
                                                 num(star.l12) + "*V^" + num(l + 1.0),
                                             {"U", "V"});
    s.kinetics_v = FunctionDescriptor::parse("-V/" + num(l) + " + " + num(star.l21) + "*U^" + num(k + 1.0) + " + " +
                                                 num(star.l22) + "*V^" + num(l + 1.0),
                                             {"U", "V"});
    return s;
}

std::pair<double, double> power_profiles(const PowerApplication& app, double x) {
    const double h = app.h();
    const double wave = app.C1 * std::cos(h * x) + app.C2 * std::sin(h * x);
    const double ratio = (app.l + 1.0) * app.star.l22 / ((app.k + 1.0) * app.star.l12);
    return {wave + app.C4, ratio * wave - app.star.l11 / app.star.l12 * app.C4};
}

namespace {

double fractional(double base, double exponent, const char* what) {
    if (base < 0.0) {
        throw DomainError(std::string("negative base ") + std::to_string(base) + " under the fractional power of " + what);
    }
    return std::pow(base, exponent);
}

}  // namespace

std::pair<double, double> power_solution(const PowerApplication& app, double t, double x) {
    const auto [phi, psi] = power_profiles(app, x);
    const double U = fractional(phi, 1.0 / (app.k + 1.0), "U") *
                     std::exp(-(app.l + 1.0) / (app.l * (app.k + 1.0)) * t);
    const double V = fractional(psi, 1.0 / (app.l + 1.0), "V") * std::exp(-t / app.l);
    return {U, V};
}

std::pair<double, double> power_solution_dx(const PowerApplication& app, double t, double x) {
    const auto [phi, psi] = power_profiles(app, x);
    const double h = app.h();
    const double dwave = h * (-app.C1 * std::sin(h * x) + app.C2 * std::cos(h * x));
    const double ratio = (app.l + 1.0) * app.star.l22 / ((app.k + 1.0) * app.star.l12);
    const double pu = 1.0 / (app.k + 1.0);
    const double pv = 1.0 / (app.l + 1.0);
    const double Ux = pu * fractional(phi, pu - 1.0, "U") * dwave *
                      std::exp(-(app.l + 1.0) / (app.l * (app.k + 1.0)) * t);
    const double Vx = pv * fractional(psi, pv - 1.0, "V") * ratio * dwave * std::exp(-t / app.l);
    return {Ux, Vx};
}

BvpReport check_bvp(const PowerApplication& app, int j, double horizon, std::size_t time_samples,
                    std::size_t space_samples) {
    app.validate();
    if (app.C2 != 0.0) throw ValidationError("zero-flux construction needs C2 = 0");
    if (j < 1) throw ValidationError("interval index j must be a positive integer");
    if (space_samples < 2 || time_samples < 2) throw ValidationError("need at least two samples in t and x");
    BvpReport r;
    r.length = j * std::numbers::pi / app.h();
    r.min_phi = std::numeric_limits<double>::infinity();
    r.min_psi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < space_samples; ++i) {
        const double x = r.length * static_cast<double>(i) / static_cast<double>(space_samples - 1);
        const auto [phi, psi] = power_profiles(app, x);
        r.min_phi = std::min(r.min_phi, phi);
        r.min_psi = std::min(r.min_psi, psi);
    }
    r.positive = r.min_phi > 0.0 && r.min_psi > 0.0;
    if (!r.positive) {
        r.min_u = r.min_v = std::numeric_limits<double>::quiet_NaN();
        r.flux_left_u = r.flux_left_v = r.flux_right_u = r.flux_right_v = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    std::tie(r.flux_left_u, r.flux_left_v) = power_solution_dx(app, 0.0, 0.0);
    std::tie(r.flux_right_u, r.flux_right_v) = power_solution_dx(app, 0.0, r.length);
    r.min_u = r.min_v = std::numeric_limits<double>::infinity();
    r.decay_monotone = true;
    for (std::size_t n = 0; n < time_samples; ++n) {
        const double t = horizon * static_cast<double>(n) / static_cast<double>(time_samples - 1);
        double sup = 0.0;
        for (std::size_t i = 0; i < space_samples; ++i) {
            const double x = r.length * static_cast<double>(i) / static_cast<double>(space_samples - 1);
            const auto [U, V] = power_solution(app, t, x);
            if (n == 0) {
                r.min_u = std::min(r.min_u, U);
                r.min_v = std::min(r.min_v, V);
            }
            sup = std::max({sup, std::fabs(U), std::fabs(V)});
        }
        if (!r.sup_norms.empty() && !(sup < r.sup_norms.back())) r.decay_monotone = false;
        r.sup_times.push_back(t);
        r.sup_norms.push_back(sup);
    }
    return r;
}

}  // namespace rdsym::linfam
