#include "rdsym/pdesolve.hpp"

#include "rdsym/error.hpp"
#include "rdsym/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdsym::pdesolve {
namespace {

struct Component {
    const FunctionDescriptor* diffusivity;
    std::vector<double> value;
    std::vector<double> padded;  // value with one mirrored ghost per side
    std::vector<double> d_padded;
    std::vector<double> diffusion;
    std::vector<double> reaction;
};

std::string at_time(double t) {
    std::ostringstream s;
    s << "t = " << t;
    return s.str();
}

void check_finite(const simd::KernelTable& k, const std::vector<double>& v, double limit, double t, const char* name) {
    const double m = k.max_abs(v.data(), v.size());
    if (!std::isfinite(m) || m > limit) {
        throw RuntimeFailure(std::string("solution blew up: max |") + name + "| exceeds " + std::to_string(limit) +
                             " at " + at_time(t));
    }
}

}  // namespace

std::vector<double> Grid::nodes() const {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

GridField simulate(const RDSystem& sys, const FunctionDescriptor& U0, const FunctionDescriptor& V0,
                   const Boundary& bc, const Grid& grid, const Settings& settings) {
    validate_shape(sys);
    if (sys.form != Form::divergence) throw ValidationError("simulate expects a divergence-form system");
    if (grid.n < 5) throw ValidationError("grid needs n >= 5 points");
    if (!(grid.x0 < grid.x1)) throw ValidationError("grid needs x0 < x1");
    if (!(settings.T > 0.0)) throw ValidationError("final time T must be positive");
    if (!(settings.sigma > 0.0 && settings.sigma <= 0.5)) throw ValidationError("safety factor must lie in (0, 0.5]");
    if (U0.arity() != 1 || V0.arity() != 1) throw ValidationError("initial conditions must be functions of x");

    std::vector<double> stamps = settings.stamps.empty() ? std::vector<double>{0.0, settings.T} : settings.stamps;
    std::sort(stamps.begin(), stamps.end());
    if (stamps.front() < 0.0 || stamps.back() > settings.T) throw ValidationError("output stamps must lie in [0, T]");

    const auto& k = simd::active();
    const std::size_t n = grid.n;
    const double dx = grid.dx();
    const double half_inv_dx2 = 0.5 / (dx * dx);

    GridField out;
    out.x = grid.nodes();
    out.system = sys;
    out.boundary = bc;

    Component comp[2];
    comp[0].diffusivity = &sys.diffusivity_u;
    comp[1].diffusivity = &sys.diffusivity_v;
    for (int c = 0; c < 2; ++c) {
        auto& m = comp[c];
        m.value.resize(n);
        const auto& ic = c == 0 ? U0 : V0;
        for (std::size_t i = 0; i < n; ++i) m.value[i] = ic(out.x[i]);
        if (bc.kind == Boundary::Kind::dirichlet) {
            m.value.front() = c == 0 ? bc.left_u : bc.left_v;
            m.value.back() = c == 0 ? bc.right_u : bc.right_v;
        }
        m.padded.resize(n + 2);
        m.d_padded.resize(n + 2);
        m.diffusion.assign(n + 2, 0.0);
        m.reaction.resize(n);
    }
    check_finite(k, comp[0].value, settings.blowup, 0.0, "U");
    check_finite(k, comp[1].value, settings.blowup, 0.0, "V");

    auto record = [&](double t) {
        out.times.push_back(t);
        out.U.push_back(comp[0].value);
        out.V.push_back(comp[1].value);
    };

    // D at every node (into d_padded[1..n]), guarded against degeneracy.
    auto diffusivities = [&](double t) {
        double dmax = 0.0;
        for (int c = 0; c < 2; ++c) {
            auto& m = comp[c];
            std::span<const double> col(m.value);
            const std::span<const double> cols[1] = {col};
            try {
                m.diffusivity->evaluate_batch(cols, std::span<double>(m.d_padded.data() + 1, n));
            } catch (const DomainError& e) {
                throw RuntimeFailure(std::string("diffusivity D") + (c == 0 ? "1" : "2") + " evaluation failed at " +
                                     at_time(t) + ": " + e.what());
            }
            const auto ex = k.extrema(m.d_padded.data() + 1, n);
            if (!(ex.min >= settings.degeneracy)) {
                const auto it = std::find_if(m.d_padded.begin() + 1, m.d_padded.begin() + 1 + static_cast<long>(n),
                                             [&](double d) { return !(d >= settings.degeneracy); });
                const auto i = static_cast<std::size_t>(it - (m.d_padded.begin() + 1));
                if (!std::isfinite(*it)) {
                    throw RuntimeFailure(std::string("diffusivity D") + (c == 0 ? "1" : "2") +
                                         " evaluation failed at x = " + std::to_string(out.x[i]) + ", " + at_time(t) +
                                         " (" + (c == 0 ? "U" : "V") + " = " + std::to_string(m.value[i]) + ")");
                }
                throw RuntimeFailure(std::string("degenerate diffusivity D") + (c == 0 ? "1" : "2") + " = " +
                                     std::to_string(*it) + " below " + std::to_string(settings.degeneracy) +
                                     " at x = " + std::to_string(out.x[i]) + ", " + at_time(t) +
                                     " (porous-medium degeneracy; scheme not valid)");
            }
            dmax = std::max(dmax, ex.max);
        }
        return dmax;
    };

    double t = 0.0;
    std::size_t next = 0;
    while (next < stamps.size() && stamps[next] <= 0.0) {
        record(0.0);
        ++next;
    }
    out.dt_min = std::numeric_limits<double>::infinity();
    while (next < stamps.size()) {
        const double dmax = diffusivities(t);
        double dt = settings.sigma * dx * dx / (2.0 * dmax);
        bool hit = false;
        // Stretch by up to 1% instead of leaving a sliver before the stamp.
        if (t + 1.01 * dt >= stamps[next]) {
            dt = stamps[next] - t;
            hit = true;
        }
        for (int c = 0; c < 2; ++c) {
            auto& m = comp[c];
            std::copy(m.value.begin(), m.value.end(), m.padded.begin() + 1);
            m.padded[0] = m.value[1];
            m.padded[n + 1] = m.value[n - 2];
            m.d_padded[0] = m.d_padded[2];
            m.d_padded[n + 1] = m.d_padded[n - 1];
            k.flux_divergence(m.padded.data(), m.d_padded.data(), half_inv_dx2, m.diffusion.data(), n + 2);
        }
        {
            std::span<const double> cu(comp[0].value), cv(comp[1].value);
            const std::span<const double> cols[2] = {cu, cv};
            try {
                sys.kinetics_u.evaluate_batch(cols, comp[0].reaction);
                sys.kinetics_v.evaluate_batch(cols, comp[1].reaction);
            } catch (const DomainError& e) {
                throw RuntimeFailure("kinetics evaluation failed at " + at_time(t) + ": " + e.what());
            }
        }
        for (int c = 0; c < 2; ++c) {
            auto& m = comp[c];
            k.euler_update(m.value.data(), m.diffusion.data() + 1, m.reaction.data(), dt, n);
            if (bc.kind == Boundary::Kind::dirichlet) {
                m.value.front() = c == 0 ? bc.left_u : bc.left_v;
                m.value.back() = c == 0 ? bc.right_u : bc.right_v;
            }
        }
        t = hit ? stamps[next] : t + dt;
        ++out.steps;
        if (dt > 0.0) {
            out.dt_min = std::min(out.dt_min, dt);
            out.dt_max = std::max(out.dt_max, dt);
        }
        check_finite(k, comp[0].value, settings.blowup, t, "U");
        check_finite(k, comp[1].value, settings.blowup, t, "V");
        while (hit && next < stamps.size() && stamps[next] <= t) {
            record(t);
            ++next;
        }
    }
    if (out.steps == 0) out.dt_min = 0.0;
    return out;
}

std::string GridField::to_csv() const {
    std::ostringstream s;
    s.precision(17);
    s << "t,x,U,V\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t i = 0; i < x.size(); ++i) s << times[k] << ',' << x[i] << ',' << U[k][i] << ',' << V[k][i] << '\n';
    }
    return s.str();
}

nlohmann::json GridField::metadata() const {
    return {{"grid", {{"n", x.size()}, {"x0", x.front()}, {"x1", x.back()}}},
            {"boundary", boundary.kind == Boundary::Kind::zero_flux ? "zero-flux" : "dirichlet"},
            {"stamps", times},
            {"system",
             {{"D1", system.diffusivity_u.describe()},
              {"D2", system.diffusivity_v.describe()},
              {"F", system.kinetics_u.describe()},
              {"G", system.kinetics_v.describe()}}},
            {"dt", {{"steps", steps}, {"min", dt_min}, {"max", dt_max}}}};
}

namespace {

double weight(std::size_t i, std::size_t n, double dx) { return (i == 0 || i + 1 == n) ? 0.5 * dx : dx; }

template <class Other>
Comparison compare_with(const GridField& field, Other&& other) {
    Comparison c;
    const std::size_t n = field.x.size();
    const double dx = n > 1 ? field.x[1] - field.x[0] : 1.0;
    for (std::size_t k = 0; k < field.times.size(); ++k) {
        Comparison::Stamp s;
        s.t = field.times[k];
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto [eu, ev] = other(k, i);
            const double du = field.U[k][i] - eu;
            const double dv = field.V[k][i] - ev;
            s.l_inf = std::max({s.l_inf, std::fabs(du), std::fabs(dv)});
            sum += weight(i, n, dx) * (du * du + dv * dv);
        }
        s.l2 = std::sqrt(sum);
        c.l_inf = std::max(c.l_inf, s.l_inf);
        c.l2 = std::max(c.l2, s.l2);
        c.stamps.push_back(s);
    }
    return c;
}

}  // namespace

Comparison compare(const GridField& field, const Exact& exact) {
    return compare_with(field, [&](std::size_t k, std::size_t i) { return exact(field.times[k], field.x[i]); });
}

Comparison compare(const GridField& a, const GridField& b) {
    if (a.x.size() != b.x.size() || a.times.size() != b.times.size()) {
        throw ValidationError("fields must share grid and stamps to be compared");
    }
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        if (a.times[k] != b.times[k]) throw ValidationError("fields must share stamps to be compared");
    }
    return compare_with(a, [&](std::size_t k, std::size_t i) { return std::pair{b.U[k][i], b.V[k][i]}; });
}

nlohmann::json Comparison::to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : stamps) per.push_back({{"t", s.t}, {"l_inf", s.l_inf}, {"l2", s.l2}});
    return {{"l_inf", l_inf}, {"l2", l2}, {"stamps", per}};
}

double mass(const GridField& field, std::size_t stamp, bool v_component) {
    const auto& w = v_component ? field.V.at(stamp) : field.U.at(stamp);
    const std::size_t n = w.size();
    const double dx = field.x[1] - field.x[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += weight(i, n, dx) * w[i];
    return sum;
}

}  // namespace rdsym::pdesolve
