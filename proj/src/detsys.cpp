#include "rdsym/detsys.hpp"

#include "rdsym/catalog.hpp"
#include "rdsym/error.hpp"
#include "rdsym/numdiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace rdsym::detsys {
namespace {

constexpr double kLieTolerance = 1e-8;

struct Jet {
    double f = 0.0;
    double t = 0.0;
    double x = 0.0;
    double xx = 0.0;
};

Jet jet(const FunctionDescriptor& c, double t, double x) {
    const std::array<double, 2> at{t, x};
    Jet j;
    j.f = c(at);
    j.t = c.derivative(at, 0, 1);
    j.x = c.derivative(at, 1, 1);
    j.xx = c.derivative(at, 1, 2);
    return j;
}

// Everything the three systems need at one sample.
struct Local {
    Jet xi0, xi1, r1, p1, q, r2, p2;
    double u = 0.0, v = 0.0;
    double eta1 = 0.0, eta2 = 0.0;
    double eta1_t = 0.0, eta1_xx = 0.0;
    double eta2_t = 0.0, eta2_xx = 0.0;
    double d1 = 0.0, d1_u = 0.0, d2 = 0.0, d2_v = 0.0;
    double C1 = 0.0, C1_u = 0.0, C1_v = 0.0;
    double C2 = 0.0, C2_u = 0.0, C2_v = 0.0;
};

Local evaluate(const RDSystem& sys, const SymmetryOperator& op, const SamplePoint& p) {
    Local L;
    L.u = p.u;
    L.v = p.v;
    L.xi0 = jet(op.time_coeff, p.t, p.x);
    L.xi1 = jet(op.space_coeff, p.t, p.x);
    L.r1 = jet(op.u_slope, p.t, p.x);
    L.p1 = jet(op.u_shift, p.t, p.x);
    L.q = jet(op.v_cross, p.t, p.x);
    L.r2 = jet(op.v_slope, p.t, p.x);
    L.p2 = jet(op.v_shift, p.t, p.x);
    L.eta1 = L.r1.f * p.u + L.p1.f;
    L.eta1_t = L.r1.t * p.u + L.p1.t;
    L.eta1_xx = L.r1.xx * p.u + L.p1.xx;
    L.eta2 = L.q.f * p.u + L.r2.f * p.v + L.p2.f;
    L.eta2_t = L.q.t * p.u + L.r2.t * p.v + L.p2.t;
    L.eta2_xx = L.q.xx * p.u + L.r2.xx * p.v + L.p2.xx;
    L.d1 = sys.diffusivity_u(p.u);
    L.d1_u = sys.diffusivity_u.derivative(p.u, 1);
    L.d2 = sys.diffusivity_v(p.v);
    L.d2_v = sys.diffusivity_v.derivative(p.v, 1);
    const std::array<double, 2> uv{p.u, p.v};
    L.C1 = sys.kinetics_u(uv);
    L.C1_u = sys.kinetics_u.derivative(uv, 0, 1);
    L.C1_v = sys.kinetics_u.derivative(uv, 1, 1);
    L.C2 = sys.kinetics_v(uv);
    L.C2_u = sys.kinetics_v.derivative(uv, 0, 1);
    L.C2_v = sys.kinetics_v.derivative(uv, 1, 1);
    return L;
}

std::string where(const SamplePoint& p) {
    std::ostringstream s;
    s << "(t, x, u, v) = (" << p.t << ", " << p.x << ", " << p.u << ", " << p.v << ")";
    return s.str();
}

void check_transformed(const RDSystem& sys) {
    validate_shape(sys);
    if (sys.form != Form::transformed) {
        throw ValidationError("determining equations are stated for the transformed form; apply the Kirchhoff map first");
    }
}

// Determining equations for the manifold Q(v) = 0 are those for Q(u) = 0
// after exchanging the components.
std::pair<RDSystem, SymmetryOperator> oriented(const RDSystem& sys, const SymmetryOperator& op) {
    if (op.manifold == Manifold::u) return {sys, op};
    return catalog::swap(sys, op);
}

SamplePoint flip(const SamplePoint& p, Manifold m) {
    if (m == Manifold::u) return p;
    return {p.t, p.x, p.v, p.u};
}

template <class Equations>
ResidualReport run(const RDSystem& sys0, const SymmetryOperator& op0, std::span<const SamplePoint> samples,
                   std::vector<std::string> labels, double tolerance, Equations&& equations) {
    check_transformed(sys0);
    const auto [sys, op] = oriented(sys0, op0);
    Accumulator acc(std::move(labels), tolerance);
    for (const auto& original : samples) {
        const SamplePoint p = flip(original, op0.manifold);
        const Local L = evaluate(sys, op, p);
        const auto values = equations(L, original);
        for (std::size_t k = 0; k < values.size(); ++k) acc.add(k, values[k], original);
        acc.count_sample();
    }
    return acc.finish();
}

}  // namespace

std::vector<SamplePoint> sample_box(std::size_t n, std::uint64_t seed, double lo, double hi, double exclusion) {
    if (!(lo < hi)) throw ValidationError("sample box needs lo < hi");
    if (exclusion < 0.0) throw ValidationError("exclusion radius must be non-negative");
    if (std::max(std::fabs(lo), std::fabs(hi)) <= exclusion) {
        throw ValidationError("sample box lies entirely inside the exclusion radius");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    auto away = [&] {
        double value = dist(rng);
        while (std::fabs(value) < exclusion) value = dist(rng);
        return value;
    };
    std::vector<SamplePoint> out(n);
    for (auto& p : out) {
        p.t = away();
        p.x = dist(rng);
        p.u = away();
        p.v = away();
    }
    return out;
}

const EquationResidual& ResidualReport::equation(const std::string& label) const {
    for (const auto& e : equations) {
        if (e.label == label) return e;
    }
    throw ValidationError("no residual labelled '" + label + "'");
}

double ResidualReport::max_abs() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.max_abs);
    return m;
}

Accumulator::Accumulator(std::vector<std::string> labels, double tolerance) : tolerance_(tolerance) {
    for (auto& l : labels) {
        EquationResidual r;
        r.label = std::move(l);
        rows_.push_back(std::move(r));
    }
    sum_sq_.assign(rows_.size(), 0.0);
}

void Accumulator::add(std::size_t equation, double value, const SamplePoint& at) {
    auto& row = rows_.at(equation);
    // A NaN residual must fail, never compare as small.
    const double a = std::isfinite(value) ? std::fabs(value) : std::numeric_limits<double>::infinity();
    sum_sq_[equation] += a * a;
    if (a > row.max_abs || (samples_ == 0 && row.max_abs == 0.0 && a == 0.0)) {
        row.max_abs = a;
        row.worst = at;
    }
}

ResidualReport Accumulator::finish() const {
    ResidualReport r;
    r.equations = rows_;
    for (std::size_t k = 0; k < rows_.size(); ++k) r.equations[k].l2 = std::sqrt(sum_sq_[k]);
    r.samples = samples_;
    r.tolerance = tolerance_;
    r.pass = std::all_of(r.equations.begin(), r.equations.end(),
                         [&](const EquationResidual& e) { return e.max_abs <= tolerance_; });
    return r;
}

ResidualReport residuals_first_type(const RDSystem& sys, const SymmetryOperator& op,
                                    std::span<const SamplePoint> samples, double tolerance) {
    return run(sys, op, samples,
               {"xi-dependence", "eta-linearity", "eta2-u-coupling", "d1-transport", "d2-scaling", "xi1-time",
                "kinetics-u", "kinetics-v"},
               tolerance, [](const Local& L, const SamplePoint& at) {
                   const double xi0 = L.xi0.f;
                   if (xi0 == 0.0 || !std::isfinite(xi0)) {
                       throw ValidationError("time coefficient xi0 vanishes at " + where(at) +
                                             "; use the xi0 = 0 system");
                   }
                   const double xi1 = L.xi1.f;
                   const double eta2_u = L.q.f;
                   const double eta2_v = L.r2.f;
                   const double eta1_u = L.r1.f;
                   const double ratio = L.eta1 / xi0;
                   std::array<double, 8> e{};
                   e[0] = L.xi0.x;
                   e[1] = 0.0;  // eta1, eta2 are affine in (u, v) by construction
                   e[2] = xi1 * eta2_u * (L.d2 - L.d1) + 2.0 * xi0 * L.q.x;
                   e[3] = (L.xi0.t * xi1 - xi0 * L.xi1.t - 2.0 * xi1 * L.xi1.x) * L.d1 - xi1 * L.eta1 * L.d1_u -
                          2.0 * xi0 * L.r1.x + xi0 * L.xi1.xx;
                   e[4] = (2.0 * L.xi1.x - L.xi0.t) * L.d2 + L.eta2 * L.d2_v;
                   e[5] = L.xi1.t * L.d2 + 2.0 * L.r2.x - L.xi1.xx;
                   e[6] = ratio * L.eta1 * L.d1_u + (L.eta1_t + 2.0 * L.xi1.x * ratio - L.xi0.t * ratio) * L.d1 -
                          L.eta1_xx + L.eta1 * L.C1_u + L.eta2 * L.C1_v + (2.0 * L.xi1.x - eta1_u) * L.C1;
                   e[7] = (L.eta2_t + ratio * eta2_u) * L.d2 - ratio * eta2_u * L.d1 - L.eta2_xx + L.eta1 * L.C2_u +
                          L.eta2 * L.C2_v - eta2_u * L.C1 + (2.0 * L.xi1.x - eta2_v) * L.C2;
                   return e;
               });
}

ResidualReport residuals_xi0_zero(const RDSystem& sys, const SymmetryOperator& op,
                                  std::span<const SamplePoint> samples, double tolerance) {
    return run(sys, op, samples,
               {"xi1-dependence", "eta-linearity", "scaling-u", "scaling-v", "xi1-time", "kinetics-u", "kinetics-v"},
               tolerance, [](const Local& L, const SamplePoint& at) {
                   if (L.xi0.f != 0.0) {
                       throw ValidationError("time coefficient xi0 is nonzero at " + where(at) +
                                             "; use the first-type system");
                   }
                   const double xi1 = L.xi1.f;
                   if (xi1 == 0.0 || !std::isfinite(xi1)) {
                       throw ValidationError("space coefficient xi1 vanishes at " + where(at) +
                                             " while xi0 = 0 (degenerate operator)");
                   }
                   std::array<double, 7> e{};
                   e[0] = 0.0;  // xi1 carries no (u, v) dependence by construction
                   e[1] = std::fabs(L.q.f);
                   e[2] = 2.0 * L.xi1.x * L.d1 + L.eta1 * L.d1_u;
                   e[3] = 2.0 * L.xi1.x * L.d2 + L.eta2 * L.d2_v;
                   e[4] = L.xi1.t * L.d2 + 2.0 * L.r2.x - L.xi1.xx;
                   e[5] = L.eta1_t * L.d1 - (L.eta1 / xi1) * (L.xi1.t * L.d1 + 2.0 * L.r1.x - L.xi1.xx) - L.eta1_xx +
                          L.eta1 * L.C1_u + L.eta2 * L.C1_v + (2.0 * L.xi1.x - L.r1.f) * L.C1;
                   e[6] = L.eta2_t * L.d2 - L.eta2_xx + L.eta1 * L.C2_u + L.eta2 * L.C2_v +
                          (2.0 * L.xi1.x - L.r2.f) * L.C2;
                   return e;
               });
}

ResidualReport residuals_lie(const RDSystem& sys, const SymmetryOperator& op, std::span<const SamplePoint> samples,
                             double tolerance) {
    return run(sys, op, samples,
               {"xi-dependence", "eta-linearity", "scaling-u", "scaling-v", "xi1-time-u", "xi1-time-v", "kinetics-u",
                "kinetics-v"},
               tolerance, [](const Local& L, const SamplePoint&) {
                   std::array<double, 8> e{};
                   e[0] = L.xi0.x;
                   e[1] = std::fabs(L.q.f);
                   e[2] = (2.0 * L.xi1.x - L.xi0.t) * L.d1 + L.eta1 * L.d1_u;
                   e[3] = (2.0 * L.xi1.x - L.xi0.t) * L.d2 + L.eta2 * L.d2_v;
                   e[4] = L.xi1.t * L.d1 + 2.0 * L.r1.x - L.xi1.xx;
                   e[5] = L.xi1.t * L.d2 + 2.0 * L.r2.x - L.xi1.xx;
                   e[6] = L.eta1_t * L.d1 - L.eta1_xx + L.eta1 * L.C1_u + L.eta2 * L.C1_v +
                          (2.0 * L.xi1.x - L.r1.f) * L.C1;
                   e[7] = L.eta2_t * L.d2 - L.eta2_xx + L.eta1 * L.C2_u + L.eta2 * L.C2_v +
                          (2.0 * L.xi1.x - L.r2.f) * L.C2;
                   return e;
               });
}

LieEquivalence lie_equivalence_test(const RDSystem& sys0, const SymmetryOperator& op0,
                                    std::span<const SamplePoint> samples) {
    check_transformed(sys0);
    LieEquivalence out;
    // eta2_u is checked before orienting: the swap itself needs it to vanish.
    for (const auto& p : samples) {
        const double q = op0.v_cross(p.t, p.x);
        if (!(std::fabs(q) <= kLieTolerance)) {
            out.equivalent = false;
            out.witness = p;
            out.failed = "eta2_u";
            out.value = q;
            return out;
        }
    }
    const auto [sys, op] = oriented(sys0, op0);
    for (const auto& original : samples) {
        const SamplePoint p = flip(original, op0.manifold);
        const std::array<double, 2> at{p.t, p.x};
        const double xi0_t = op.time_coeff.derivative(at, 0, 1);
        const double xi1_x = op.space_coeff.derivative(at, 1, 1);
        const double eta1 = op.eta_u(p.t, p.x, p.u, p.v);
        const double value =
            (2.0 * xi1_x - xi0_t) * sys.diffusivity_u(p.u) + eta1 * sys.diffusivity_u.derivative(p.u, 1);
        if (!(std::fabs(value) <= kLieTolerance)) {
            out.equivalent = false;
            out.witness = original;
            out.failed = "scaling";
            out.value = value;
            return out;
        }
    }
    return out;
}

std::vector<std::pair<double, double>> rect_points(const Rect& r) {
    if (r.nt < 1 || r.nx < 1) throw ValidationError("grid needs at least one point per direction");
    auto node = [](double a, double b, std::size_t i, std::size_t n) {
        return n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    std::vector<std::pair<double, double>> out;
    out.reserve(r.nt * r.nx);
    for (std::size_t i = 0; i < r.nt; ++i) {
        for (std::size_t j = 0; j < r.nx; ++j) out.emplace_back(node(r.t0, r.t1, i, r.nt), node(r.x0, r.x1, j, r.nx));
    }
    return out;
}

ResidualReport pde_residuals(const RDSystem& sys, const Field& field, const Rect& grid, double tolerance) {
    validate_shape(sys);
    Accumulator acc({"S1", "S2"}, tolerance);
    for (const auto& [t, x] : rect_points(grid)) {
        const auto [u, v] = field(t, x);
        auto comp = [&](int c) {
            return [&, c](double tt, double xx) {
                const auto w = field(tt, xx);
                return c == 0 ? w.first : w.second;
            };
        };
        std::array<double, 2> res{};
        for (int c = 0; c < 2; ++c) {
            const auto f = comp(c);
            const double w = c == 0 ? u : v;
            const double w_t = numdiff::central([&](double s) { return f(s, x); }, t, 1);
            const double w_x = numdiff::central([&](double s) { return f(t, s); }, x, 1);
            const double w_xx = numdiff::central([&](double s) { return f(t, s); }, x, 2);
            const auto& D = c == 0 ? sys.diffusivity_u : sys.diffusivity_v;
            const auto& K = c == 0 ? sys.kinetics_u : sys.kinetics_v;
            const double kin = K(u, v);
            if (sys.form == Form::transformed) {
                res[static_cast<std::size_t>(c)] = w_xx - D(w) * w_t - kin;
            } else {
                res[static_cast<std::size_t>(c)] = w_t - D(w) * w_xx - D.derivative(w, 1) * w_x * w_x - kin;
            }
        }
        const SamplePoint at{t, x, u, v};
        acc.add(0, res[0], at);
        acc.add(1, res[1], at);
        acc.count_sample();
    }
    return acc.finish();
}

nlohmann::json to_json(const SamplePoint& p) {
    return {{"t", p.t}, {"x", p.x}, {"u", p.u}, {"v", p.v}};
}

nlohmann::json to_json(const ResidualReport& report) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& e : report.equations) {
        const double m = std::isfinite(e.max_abs) ? e.max_abs : std::numeric_limits<double>::max();
        const double l2 = std::isfinite(e.l2) ? e.l2 : std::numeric_limits<double>::max();
        eqs.push_back({{"label", e.label}, {"max_abs", m}, {"l2", l2}, {"worst_point", to_json(e.worst)}});
    }
    return {{"equations", eqs}, {"samples", report.samples}, {"tolerance", report.tolerance}, {"pass", report.pass}};
}

}  // namespace rdsym::detsys
