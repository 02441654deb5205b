// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "linfam_draws.hpp"
#include "rdsym/catalog.hpp"
#include "rdsym/detsys.hpp"
#include "rdsym/error.hpp"
#include "rdsym/kirchhoff.hpp"
#include "rdsym/linfam.hpp"
#include "rdsym/pdesolve.hpp"
#include "rdsym/reduction.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace rdsym;
using testsupport::Gen;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::map<std::string, FunctionDescriptor> parse_all(const catalog::Draw& draw) {
    std::map<std::string, FunctionDescriptor> out;
    for (const auto& [name, src] : draw.functions) out[name] = FunctionDescriptor::parse(src, {catalog::function_variable(name)});
    return out;
}

Outcome catalog_certification() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    int failed = 0;
    for (int id = 1; id <= 21; ++id) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto inst = catalog::instantiate(id, catalog::random_draw(id, seed));
            const auto pts = detsys::sample_box(50, 1000 + seed);
            const auto rep = detsys::residuals_first_type(inst.system, inst.op, pts, 1e-6);
            worst = std::max(worst, rep.max_abs());
            failed += rep.max_abs() < 1e-6 ? 0 : 1;
        }
    }
    const double t = seconds_since(start);
    return {failed == 0 && t < 10.0,
            fmt("21 cases x 3 draws x 50 points, max residual %.2e (< 1e-6), %d failing, %.2f s (< 10 s)", worst, failed, t)};
}

Outcome conditional_not_lie() {
    int equivalent = 0;
    std::string labels;
    for (int id = 1; id <= 21; ++id) {
        const auto inst = catalog::instantiate(id, catalog::random_draw(id, 1));
        const auto eq = detsys::lie_equivalence_test(inst.system, inst.op, detsys::sample_box(50, 7));
        if (eq.equivalent || !eq.witness) {
            ++equivalent;
            labels += " " + std::to_string(id);
        }
    }
    return {equivalent == 0, equivalent == 0 ? "all 21 operators fail the Lie restriction with a witness point"
                                             : "Lie-equivalent cases:" + labels};
}

Outcome mutation_soundness() {
    const auto pts = detsys::sample_box(50, 77);
    int mutations = 0, missed = 0;
    double weakest = INFINITY;
    for (int id = 1; id <= 21; ++id) {
        const auto draw = catalog::random_draw(id, 2);
        const auto inst = catalog::instantiate(id, draw);
        const auto fns = parse_all(draw);
        for (const auto& slot : catalog::family_changing_slots(inst.kinetics)) {
            auto k = inst.kinetics;
            catalog::slot_value(k, slot) += 0.1;
            auto sys = inst.system;
            std::tie(sys.kinetics_u, sys.kinetics_v) = catalog::build_kinetics(k, sys.diffusivity_u, fns);
            const double r = detsys::residuals_first_type(sys, inst.op, pts).max_abs();
            ++mutations;
            weakest = std::min(weakest, r);
            missed += r > 1e-3 ? 0 : 1;
        }
    }
    return {missed == 0 && mutations > 0,
            fmt("%d single-coefficient mutations (+0.1), smallest detected residual %.2e (> 1e-3), %d missed", mutations,
                weakest, missed)};
}

Outcome linear_family_oracle() {
    Gen g(2024);
    double worst = 0.0;
    for (int id = 1; id <= 9; ++id) {
        for (int i = 0; i < 100; ++i) {
            const linfam::LinearFamily fam(testsupport::draw_matrix(id, g),
                                           {g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)});
            if (fam.case_id() != id) return {false, fmt("draw for branch %d classified as %d", id, fam.case_id())};
            for (int j = 0; j < 5; ++j) worst = std::max(worst, testsupport::substitution_residual(fam, g.uniform(-1, 1)));
        }
    }
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto m = testsupport::draw_matrix(i % 9 + 1, g);
        agree += linfam::classify(m) == testsupport::root_structure(m) ? 1 : 0;
    }
    return {worst < 1e-9 && agree == 1000,
            fmt("9 branches x 100 draws, substitution residual %.2e (< 1e-9); classify vs quartic roots %d/1000", worst, agree)};
}

Outcome arbitrary_diffusivity() {
    const linfam::LinearFamily fam({-4, 2, 4, -2}, {0.2, 0, 0, 0.25});
    const auto lifted = linfam::lift_family(fam, 2.0);
    const detsys::Field field = [&](double t, double x) { return lifted(t, x); };
    detsys::Rect grid;
    grid.nt = grid.nx = 50;
    std::string detail = "case-2 family, alpha = 2, 50x50 grid:";
    bool ok = fam.case_id() == 2;
    for (const auto& d1 : {FunctionDescriptor::power(1.0, -0.5, "u"), FunctionDescriptor::exponential(1.0, 1.0, "u"),
                           FunctionDescriptor::parse("1/(1 + u^2)", {"u"})}) {
        const double r = detsys::pde_residuals(lifted.system(d1), field, grid).max_abs();
        ok = ok && r < 1e-6;
        detail += fmt(" %s %.1e", d1.describe().c_str(), r);
    }
    return {ok, detail + " (< 1e-6)"};
}

linfam::PowerApplication porous_app() {
    linfam::PowerApplication app;
    app.k = 1;
    app.l = 1;
    app.star = {2, -1, -2, 1};
    app.C1 = 0.2;
    app.C2 = 0;
    app.C4 = 0.25;
    return app;
}

double porous_error(const linfam::PowerApplication& app, std::size_t n) {
    const auto U0 = FunctionDescriptor::composite(
        {"x"}, [app](std::span<const double> a) { return linfam::power_solution(app, 0, a[0]).first; }, "U(0,x)");
    const auto V0 = FunctionDescriptor::composite(
        {"x"}, [app](std::span<const double> a) { return linfam::power_solution(app, 0, a[0]).second; }, "V(0,x)");
    pdesolve::Settings s;
    s.T = 1.0;
    const auto field =
        pdesolve::simulate(app.system(), U0, V0, pdesolve::Boundary::zero_flux(), {n, 0.0, M_PI / app.h()}, s);
    return pdesolve::compare(field, [&](double t, double x) { return linfam::power_solution(app, t, x); }).l_inf;
}

Outcome porous_problem() {
    const auto start = std::chrono::steady_clock::now();
    const auto app = porous_app();
    app.validate();
    const auto bvp = linfam::check_bvp(app, 1, 1.0);
    const double flux = std::max({std::fabs(bvp.flux_left_u), std::fabs(bvp.flux_left_v), std::fabs(bvp.flux_right_u),
                                  std::fabs(bvp.flux_right_v)});
    const double e201 = porous_error(app, 201), e401 = porous_error(app, 401);
    const double ratio = e201 / e401;
    const double t = seconds_since(start);
    const bool ok = std::fabs(app.h() - std::sqrt(6.0)) < 1e-15 && flux < 1e-12 && bvp.min_u > 0 && bvp.min_v > 0 &&
                    bvp.decay_monotone && e201 <= 2e-3 && ratio > 3.5 && ratio < 4.5 && t < 30.0;
    return {ok, fmt("(a) end flux %.1e (< 1e-12) (b) min U %.4f, min V %.4f (c) sup-norm decreasing: %s "
                    "(d) L_inf %.2e at n=201 (<= 2e-3), %.2e at n=401, ratio %.2f (~4); %.1f s (< 30 s)",
                    flux, bvp.min_u, bvp.min_v, bvp.decay_monotone ? "yes" : "no", e201, e401, ratio, t)};
}

Outcome reduction_consistency() {
    struct Setup {
        int id;
        std::map<std::string, double> params;
        std::string f, g;
    };
    // Linear-coupling style kinetics: case 1 with alpha = beta = 1 is exactly
    // phi'' = l11 phi + l12 psi, psi'' = l21 phi + l22 psi.
    const Setup setups[] = {
        {1, {{"alpha", 1.0}, {"beta", 1.0}}, "-0.3 + 0.4*w", "0.2 + 0.3/w"},
        {2, {{"alpha", 0.5}}, "-0.3 + 0.2*w", "0.1 - 0.2*w"},
        {3, {{"alpha", 0.5}}, "0.3 + 0.2*w", "0.1 - 0.2*w"},
        {4, {{"beta", 2.0}}, "0.3 + 0.2*w", "-0.1 + 0.2*w"},
    };
    detsys::Rect grid;
    grid.nt = grid.nx = 50;
    bool ok = true;
    std::string detail;
    for (const auto& s : setups) {
        const auto f = FunctionDescriptor::parse(s.f, {"w"}), g = FunctionDescriptor::parse(s.g, {"w"});
        std::map<std::string, FunctionDescriptor> fn{{"f", f}, {"g", g}};
        for (const auto& name : catalog::info(s.id).functions) {
            if (name == "d1") fn["d1"] = FunctionDescriptor::parse("1 + 0.5*u^2", {"u"});
            if (name == "d2") fn["d2"] = FunctionDescriptor::parse("1 + v^2", {"v"});
        }
        const auto sys = catalog::instantiate(s.id, s.params, fn).system;
        const auto ansatz = reduction::build_ansatz(s.id, s.params);
        const auto rhs = reduction::reduced_rhs(s.id, f, g, s.params);
        auto profile = [&](double h) { return reduction::integrate_reduced(rhs, 1, 0, 1, 0, {0, 1}, h, s.id, s.params); };
        const auto rep = reduction::lift_and_check(ansatz, profile(1e-3), grid, sys);
        const double S = std::max(rep.equation("S1").max_abs, rep.equation("S2").max_abs);
        const double Q = std::max(rep.equation("Q(u)").max_abs, rep.equation("Q(v)").max_abs);
        const double a = profile(0.1).phi.back(), b = profile(0.05).phi.back(), c = profile(0.025).phi.back();
        const double richardson = (a - b) / (b - c);
        const auto coarse = reduction::lift_and_check(ansatz, profile(0.1), grid, sys, std::nullopt, 1.0);
        const auto fine = reduction::lift_and_check(ansatz, profile(0.05), grid, sys, std::nullopt, 1.0);
        const double s_ratio = coarse.max_abs() / fine.max_abs();
        ok = ok && S < 1e-4 && Q < 1e-9 && std::fabs(richardson - 16) < 2.4 && s_ratio > 10;
        detail += fmt("%scase %d |S| %.1e |Q| %.1e order ratio %.1f", detail.empty() ? "" : "; ", s.id, S, Q, richardson);
    }
    return {ok, detail + " (|S| < 1e-4, |Q| < 1e-9, ratio ~16)"};
}

Outcome kirchhoff_round_trips() {
    Gen g(8);
    const auto power = FunctionDescriptor::power(1.0, 1.5, "U");
    const auto expo = FunctionDescriptor::exponential(1.0, 0.7, "U");
    const auto parsed = FunctionDescriptor::parse("1 + U^2/(1 + U^2)", {"U"});
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double U = g.uniform(0.1, 3.0);
        for (const auto* d : {&power, &expo, &parsed}) {
            const double back = kirchhoff::inverse(*d, kirchhoff::forward(*d, U));
            worst = std::max(worst, std::fabs(back - U) / std::fabs(U));
        }
    }
    const double k = kirchhoff::exponent_from_gamma(-0.5);
    // With u = U^2, d1 = u^(-1/2) must equal 1/D1 = 1/U.
    double link = 0.0;
    for (double U : {0.3, 1.0, 2.5}) link = std::max(link, std::fabs(std::pow(U * U, -0.5) - 1.0 / std::pow(U, k)));
    return {worst < 1e-10 && std::fabs(k - 1.0) < 1e-15 && link < 1e-14,
            fmt("power, exponential, parsed over 100 points: worst relative error %.1e (< 1e-10); gamma = -1/2 gives k = %g",
                worst, k)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"catalog certification", catalog_certification},
        {"conditional symmetries are not Lie", conditional_not_lie},
        {"mutation soundness", mutation_soundness},
        {"linear family oracle", linear_family_oracle},
        {"arbitrary diffusivity family", arbitrary_diffusivity},
        {"porous Lotka-Volterra zero-flux problem", porous_problem},
        {"reduction self-consistency", reduction_consistency},
        {"Kirchhoff round trips", kirchhoff_round_trips},
    };
    int failures = 0, n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("AC%d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
