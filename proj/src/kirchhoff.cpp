#include "rdsym/kirchhoff.hpp"

#include "rdsym/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace rdsym {

void validate_shape(const RDSystem& sys) {
    if (sys.diffusivity_u.arity() != 1 || sys.diffusivity_v.arity() != 1) {
        throw ValidationError("diffusivities must be functions of one variable");
    }
    if (sys.kinetics_u.arity() != 2 || sys.kinetics_v.arity() != 2) {
        throw ValidationError("kinetics must be functions of two variables");
    }
}

namespace kirchhoff {
namespace {

using Kind = FunctionDescriptor::Kind;

constexpr double kQuadratureTol = 1e-13;

[[noreturn]] void non_positive(double U) {
    throw DomainError("diffusivity is not positive at U = " + std::to_string(U));
}

double quadrature(const FunctionDescriptor& D, double a, double b) {
    if (a == b) return 0.0;
    // Integrate on [-1, 1] after an explicit affine change of variable: the
    // library's error estimate is expressed on the reference interval, so
    // this keeps estimate and tolerance in the same units.
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto integrand = [&](double t) {
        const double s = mid + half * t;
        const double value = D(s);
        if (!(value > 0.0)) non_positive(s);
        return half * value;
    };
    double error = 0.0;
    const double result =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -1.0, 1.0, 15, kQuadratureTol, &error);
    if (!std::isfinite(result) || error > 1e-10 * std::fmax(1e-300, std::fabs(result))) {
        throw RuntimeFailure("Kirchhoff integral did not converge on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
    }
    return result;
}

// Closed-form integral of D from a to b, or nullopt when none is coded.
std::optional<double> closed_integral(const FunctionDescriptor& D, double a, double b) {
    const auto& c = D.closed_form();
    if (!c) return std::nullopt;
    switch (c->tag) {
        case Kind::constant:
            if (!(c->coefficient > 0.0)) non_positive(a);
            return c->coefficient * (b - a);
        case Kind::exponential:
            if (!(c->coefficient > 0.0)) non_positive(a);
            if (c->parameter == 0.0) return c->coefficient * (b - a);
            return c->coefficient / c->parameter *
                   (std::exp(c->parameter * b) - std::exp(c->parameter * a));
        case Kind::affine:
            if (!(D(a) > 0.0)) non_positive(a);
            if (!(D(b) > 0.0)) non_positive(b);
            return c->offset * (b - a) + 0.5 * c->coefficient * (b * b - a * a);
        case Kind::power: {
            const double k = c->parameter;
            if (!(c->coefficient > 0.0)) non_positive(a);
            if (a < 0.0 || b < 0.0) throw DomainError("power-law diffusivity needs a non-negative argument");
            if (k == -1.0) {
                if (!(a > 0.0 && b > 0.0)) throw DomainError("logarithmic Kirchhoff map needs positive U");
                return c->coefficient * std::log(b / a);
            }
            if (k + 1.0 < 0.0 && (a == 0.0 || b == 0.0)) {
                throw DomainError("Kirchhoff integral diverges at U = 0");
            }
            return c->coefficient / (k + 1.0) * (std::pow(b, k + 1.0) - std::pow(a, k + 1.0));
        }
        default:
            return std::nullopt;
    }
}

double power_exponent_plus_one(const Map& map) {
    return map.diffusivity.closed_form()->parameter + 1.0;
}

}  // namespace

Map make_map(const FunctionDescriptor& diffusivity, Convention convention, std::optional<double> reference) {
    if (diffusivity.arity() != 1) throw ValidationError("diffusivity must be a function of one variable");
    Map map;
    map.diffusivity = diffusivity;
    const auto& c = diffusivity.closed_form();
    const bool power = c && c->tag == Kind::power;
    if (power && c->parameter == -1.0 && convention == Convention::power_normalized) {
        throw ValidationError("power-normalized Kirchhoff map requires exponent k != -1");
    }
    if (power && convention == Convention::power_normalized && !reference) {
        if (!(c->coefficient > 0.0)) throw DomainError("power-law diffusivity coefficient must be positive");
        map.normalized_power = true;
        map.scale = (c->parameter + 1.0) / c->coefficient;
        map.reference = 0.0;
        return map;
    }
    map.scale = 1.0;
    map.reference = reference.value_or(power && c->parameter <= -1.0 ? 1.0 : 0.0);
    return map;
}

double forward(const Map& map, double U) {
    if (map.normalized_power) {
        const double e = power_exponent_plus_one(map);
        if (U < 0.0 || (U == 0.0 && e < 0.0)) {
            throw DomainError("power-normalized Kirchhoff map needs U > 0, got " + std::to_string(U));
        }
        return std::pow(U, e);
    }
    if (auto closed = closed_integral(map.diffusivity, map.reference, U)) return map.scale * *closed;
    return map.scale * quadrature(map.diffusivity, map.reference, U);
}

double inverse(const Map& map, double u, std::optional<std::pair<double, double>> bracket) {
    if (map.normalized_power && !bracket) {
        const double e = power_exponent_plus_one(map);
        if (u < 0.0 || (u == 0.0 && e < 0.0)) {
            throw DomainError("u = " + std::to_string(u) + " is outside the range of the power map");
        }
        return std::pow(u, 1.0 / e);
    }
    const auto& c = map.diffusivity.closed_form();
    if (c && !bracket && !map.normalized_power) {
        const double target = u / map.scale;
        if (c->tag == Kind::constant && c->coefficient > 0.0) return map.reference + target / c->coefficient;
        if (c->tag == Kind::exponential && c->coefficient > 0.0 && c->parameter != 0.0) {
            const double arg = std::exp(c->parameter * map.reference) + c->parameter * target / c->coefficient;
            if (!(arg > 0.0)) {
                throw DomainError("u = " + std::to_string(u) + " is outside the range of the exponential map");
            }
            return std::log(arg) / c->parameter;
        }
    }

    // Residuals are accumulated from the last evaluated point so each step
    // only integrates over the distance moved.
    double anchor = map.reference;
    double anchor_value = 0.0;
    auto residual = [&](double U) {
        double value = 0.0;
        if (map.normalized_power) {
            value = forward(map, U);
        } else if (auto closed = closed_integral(map.diffusivity, anchor, U)) {
            value = anchor_value + map.scale * *closed;
        } else {
            value = anchor_value + map.scale * quadrature(map.diffusivity, anchor, U);
        }
        anchor = U;
        anchor_value = value;
        return value - u;
    };
    double lo = 0.0;
    double hi = 0.0;
    double flo = 0.0;
    double fhi = 0.0;
    if (bracket) {
        lo = bracket->first;
        hi = bracket->second;
        if (!(lo < hi)) throw ValidationError("inverse bracket must satisfy lo < hi");
        flo = residual(lo);
        fhi = residual(hi);
        if (flo > 0.0 || fhi < 0.0) {
            throw DomainError("u = " + std::to_string(u) + " is outside the range of the map on the bracket");
        }
    } else {
        // Expand away from the reference in the direction of u.
        const double r = map.reference;
        const double direction = u >= 0.0 ? 1.0 : -1.0;
        double width = std::fmax(1.0, std::fabs(r)) * 0.5;
        double inner = r;
        double f_inner = -u;
        double outer = r;
        double f_outer = f_inner;
        bool found = (f_inner == 0.0);
        for (int i = 0; i < 80 && !found; ++i) {
            outer = r + direction * width;
            try {
                f_outer = residual(outer);
            } catch (const DomainError&) {
                // Hit the edge of the domain: shrink towards the last good point.
                width = 0.5 * (width + std::fabs(inner - r));
                if (width - std::fabs(inner - r) < 1e-14 * std::fmax(1.0, std::fabs(r))) break;
                continue;
            }
            if ((direction > 0.0 && f_outer >= 0.0) || (direction < 0.0 && f_outer <= 0.0)) {
                found = true;
                break;
            }
            inner = outer;
            f_inner = f_outer;
            width *= 2.0;
        }
        if (f_inner == 0.0) return inner;
        if (!found) throw DomainError("u = " + std::to_string(u) + " is outside the range of the Kirchhoff map");
        lo = direction > 0.0 ? inner : outer;
        hi = direction > 0.0 ? outer : inner;
        flo = direction > 0.0 ? f_inner : f_outer;
        fhi = direction > 0.0 ? f_outer : f_inner;
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    // Newton with bisection fallback; derivative of the map is scale * D.
    double U = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = residual(U);
        if (f == 0.0) return U;
        if (f < 0.0) {
            lo = U;
        } else {
            hi = U;
        }
        const double slope = map.scale * map.diffusivity(U);
        double next = slope > 0.0 ? U - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - U) <= 2.0 * std::numeric_limits<double>::epsilon() * std::fmax(1.0, std::fabs(U)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::fmax(1.0, std::fabs(U))) {
            return next;
        }
        U = next;
    }
    throw RuntimeFailure("Kirchhoff inverse did not converge for u = " + std::to_string(u));
}

double forward(const FunctionDescriptor& diffusivity, double U, Convention convention, std::optional<double> reference) {
    return forward(make_map(diffusivity, convention, reference), U);
}

double inverse(const FunctionDescriptor& diffusivity, double u, Convention convention, std::optional<double> reference) {
    return inverse(make_map(diffusivity, convention, reference), u);
}

double exponent_from_gamma(double gamma) {
    if (gamma == -1.0) throw ValidationError("gamma = -1 has no power-law counterpart");
    return -gamma / (gamma + 1.0);
}

double gamma_from_exponent(double k) {
    if (k == -1.0) throw ValidationError("exponent k = -1 is excluded");
    return -k / (k + 1.0);
}

namespace {

struct Component {
    FunctionDescriptor diffusivity;       // in the new variable
    std::function<double(double)> back;   // new variable -> old variable
    double scale;
    double reference;
};

// Divergence -> transformed for one component.
Component to_transformed(const FunctionDescriptor& D, Convention convention, const std::string& var) {
    const Map map = make_map(D, convention);
    Component out;
    out.scale = map.scale;
    out.reference = map.reference;
    if (map.normalized_power) {
        const double c = D.closed_form()->coefficient;
        const double k = D.closed_form()->parameter;
        out.diffusivity = FunctionDescriptor::power(1.0 / c, gamma_from_exponent(k), var);
        const double e = 1.0 / (k + 1.0);
        out.back = [e](double u) {
            if (u < 0.0) throw DomainError("power map needs u >= 0");
            return std::pow(u, e);
        };
        return out;
    }
    out.back = [map](double u) { return inverse(map, u); };
    out.diffusivity = FunctionDescriptor::composite(
        {var},
        [map](std::span<const double> p) { return 1.0 / map.diffusivity(inverse(map, p[0])); },
        "1/D(U(" + var + "))");
    return out;
}

// Transformed -> divergence for one component: U = reference + (1/scale) * integral_0^u d.
Component to_divergence(const FunctionDescriptor& d, double scale, double reference, bool normalized,
                        const std::string& var) {
    Component out;
    out.scale = scale;
    out.reference = reference;
    const auto& c = d.closed_form();
    if (normalized && c && c->tag == Kind::power) {
        const double k = exponent_from_gamma(c->parameter);
        out.diffusivity = FunctionDescriptor::power(1.0 / c->coefficient, k, var);
        const double e = k + 1.0;
        out.back = [e](double U) {
            if (U < 0.0) throw DomainError("power map needs U >= 0");
            return std::pow(U, e);
        };
        return out;
    }
    Map reverse;
    reverse.diffusivity = d;
    reverse.scale = 1.0 / scale;
    reverse.reference = 0.0;
    out.back = [reverse, reference](double U) { return inverse(reverse, U - reference); };
    out.diffusivity = FunctionDescriptor::composite(
        {var},
        [reverse, reference](std::span<const double> p) {
            return 1.0 / reverse.diffusivity(inverse(reverse, p[0] - reference));
        },
        "1/d(u(" + var + "))");
    return out;
}

FunctionDescriptor map_kinetics(const FunctionDescriptor& K, std::function<double(double)> bu,
                                std::function<double(double)> bv, double factor, std::vector<std::string> vars,
                                std::string label) {
    return FunctionDescriptor::composite(
        std::move(vars),
        [K, bu = std::move(bu), bv = std::move(bv), factor](std::span<const double> p) {
            return factor * K(bu(p[0]), bv(p[1]));
        },
        std::move(label));
}

}  // namespace

RDSystem transform_system(const RDSystem& sys, Convention convention) {
    validate_shape(sys);
    RDSystem out;
    if (sys.form == Form::divergence) {
        Component cu = to_transformed(sys.diffusivity_u, convention, "u");
        Component cv = to_transformed(sys.diffusivity_v, convention, "v");
        out.form = Form::transformed;
        out.diffusivity_u = cu.diffusivity;
        out.diffusivity_v = cv.diffusivity;
        out.kinetics_u = map_kinetics(sys.kinetics_u, cu.back, cv.back, -cu.scale, {"u", "v"}, "-s*F(U(u),V(v))");
        out.kinetics_v = map_kinetics(sys.kinetics_v, cu.back, cv.back, -cv.scale, {"u", "v"}, "-s*G(U(u),V(v))");
        out.frame = KirchhoffFrame{convention, cu.scale, cv.scale, cu.reference, cv.reference};
        return out;
    }

    KirchhoffFrame frame;
    if (sys.frame) {
        frame = *sys.frame;
    } else {
        // Without a recorded frame: normalized power laws where possible,
        // otherwise the raw integral from 0.
        frame.convention = convention;
        auto default_scale = [&](const FunctionDescriptor& d) {
            const auto& c = d.closed_form();
            if (convention == Convention::power_normalized && c && c->tag == Kind::power) {
                return c->coefficient * (exponent_from_gamma(c->parameter) + 1.0);
            }
            return 1.0;
        };
        frame.scale_u = default_scale(sys.diffusivity_u);
        frame.scale_v = default_scale(sys.diffusivity_v);
    }
    const bool normalized = frame.convention == Convention::power_normalized;
    Component cu = to_divergence(sys.diffusivity_u, frame.scale_u, frame.reference_u, normalized, "U");
    Component cv = to_divergence(sys.diffusivity_v, frame.scale_v, frame.reference_v, normalized, "V");
    out.form = Form::divergence;
    out.diffusivity_u = cu.diffusivity;
    out.diffusivity_v = cv.diffusivity;
    out.kinetics_u = map_kinetics(sys.kinetics_u, cu.back, cv.back, -1.0 / frame.scale_u, {"U", "V"}, "-C1(u(U),v(V))/s");
    out.kinetics_v = map_kinetics(sys.kinetics_v, cu.back, cv.back, -1.0 / frame.scale_v, {"U", "V"}, "-C2(u(U),v(V))/s");
    return out;
}

}  // namespace kirchhoff
}  // namespace rdsym
