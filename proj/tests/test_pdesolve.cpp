#include "doctest.h"
#include "rdsym/error.hpp"
#include "rdsym/linfam.hpp"
#include "rdsym/pdesolve.hpp"
#include "rdsym/simd/kernels.hpp"
#include "support.hpp"

#include <cmath>

using rdsym::Form;
using rdsym::FunctionDescriptor;
using rdsym::RDSystem;
namespace pde = rdsym::pdesolve;
namespace simd = rdsym::simd;

namespace {

RDSystem divergence(const std::string& d1, const std::string& d2, const std::string& f, const std::string& g) {
    RDSystem s;
    s.form = Form::divergence;
    s.diffusivity_u = FunctionDescriptor::parse(d1, {"U"});
    s.diffusivity_v = FunctionDescriptor::parse(d2, {"V"});
    s.kinetics_u = FunctionDescriptor::parse(f, {"U", "V"});
    s.kinetics_v = FunctionDescriptor::parse(g, {"U", "V"});
    return s;
}

RDSystem heat() { return divergence("1", "1", "0", "0"); }

pde::GridField run_heat(std::size_t n) {
    const auto ic = FunctionDescriptor::parse("cos(pi*x)", {"x"});
    pde::Settings s;
    s.T = 0.1;
    return pde::simulate(heat(), ic, ic, pde::Boundary::zero_flux(), {n, 0, 1}, s);
}

double heat_error(std::size_t n) {
    return pde::compare(run_heat(n), [](double t, double x) {
               const double e = std::exp(-M_PI * M_PI * t) * std::cos(M_PI * x);
               return std::pair{e, e};
           }).l_inf;
}

rdsym::linfam::PowerApplication porous_app() {
    rdsym::linfam::PowerApplication app;
    app.k = 1;
    app.l = 1;
    app.star = {2, -1, -2, 1};
    app.C1 = 0.2;
    app.C4 = 0.25;
    return app;
}

pde::GridField run_porous(std::size_t n) {
    const auto app = porous_app();
    const auto U0 = FunctionDescriptor::composite(
        {"x"}, [app](std::span<const double> a) { return rdsym::linfam::power_solution(app, 0, a[0]).first; }, "U(0,x)");
    const auto V0 = FunctionDescriptor::composite(
        {"x"}, [app](std::span<const double> a) { return rdsym::linfam::power_solution(app, 0, a[0]).second; }, "V(0,x)");
    pde::Settings s;
    s.T = 1.0;
    s.stamps = {0, 0.5, 1};
    return pde::simulate(app.system(), U0, V0, pde::Boundary::zero_flux(), {n, 0, M_PI / app.h()}, s);
}

}  // namespace

TEST_CASE("kinetic equilibrium stays put") {
    const auto zero = FunctionDescriptor::constant(0.0, {"x"});
    const auto sys = porous_app().system();
    // The porous system degenerates at U = V = 0 and must refuse to start;
    // the fixed point itself is checked with D = 1 + U.
    const auto lin = divergence("1 + U", "1 + V", "-U + 2*U^2 - V^2", "-V - 2*U^2 + V^2");
    pde::Settings s;
    s.T = 0.5;
    const auto f = pde::simulate(lin, zero, zero, pde::Boundary::zero_flux(), {41, 0, 1}, s);
    for (const auto& row : f.U)
        for (double u : row) CHECK(std::fabs(u) <= 1e-14);
    for (const auto& row : f.V)
        for (double v : row) CHECK(std::fabs(v) <= 1e-14);
    CHECK_THROWS_AS(pde::simulate(sys, zero, zero, pde::Boundary::zero_flux(), {41, 0, 1}, s), rdsym::RuntimeFailure);
}

TEST_CASE("heat equation converges at second order") {
    const double e51 = heat_error(51), e101 = heat_error(101), e201 = heat_error(201);
    const double o1 = std::log2(e51 / e101), o2 = std::log2(e101 / e201);
    CHECK(o1 >= 1.8);
    CHECK(o1 <= 2.2);
    CHECK(o2 >= 1.8);
    CHECK(o2 <= 2.2);
    CHECK(e51 / e101 == doctest::Approx(4).epsilon(0.1));
}

TEST_CASE("zero-flux diffusion conserves mass") {
    const auto ic = FunctionDescriptor::parse("1 + 0.5*cos(3*x) + x^2", {"x"});
    const auto sys = divergence("1 + U^2", "exp(-V)", "0", "0");
    pde::Settings s;
    s.T = 0.2;
    s.stamps = {0, 0.05, 0.1, 0.2};
    const auto f = pde::simulate(sys, ic, ic, pde::Boundary::zero_flux(), {101, 0, 2}, s);
    for (std::size_t k = 1; k < f.times.size(); ++k) {
        CHECK(std::fabs(pde::mass(f, k) - pde::mass(f, 0)) < 1e-10);
        CHECK(std::fabs(pde::mass(f, k, true) - pde::mass(f, 0, true)) < 1e-10);
    }
}

TEST_CASE("stamps are hit exactly") {
    const auto f = run_heat(51);
    REQUIRE(f.times.size() == 2);
    CHECK(f.times[0] == 0.0);
    CHECK(f.times[1] == 0.1);
    CHECK(f.steps > 0);
    CHECK(f.dt_max <= 1.01 * 0.4 * (0.02 * 0.02) / 2);
}

TEST_CASE("dirichlet ends are held") {
    const auto ic = FunctionDescriptor::parse("x", {"x"});
    pde::Settings s;
    s.T = 2.0;
    const auto f = pde::simulate(heat(), ic, ic, pde::Boundary::dirichlet(0, 0, 1, 1), {21, 0, 1}, s);
    // Linear profile is the steady state.
    for (std::size_t i = 0; i < f.x.size(); ++i) CHECK(f.U.back()[i] == doctest::Approx(f.x[i]).epsilon(1e-12));
}

TEST_CASE("comparison is symmetric") {
    const auto a = run_heat(51);
    auto b = a;
    testsupport::Gen g(31);
    for (auto& row : b.U)
        for (double& u : row) u += g.uniform(-1e-3, 1e-3);
    for (auto& row : b.V)
        for (double& v : row) v += g.uniform(-1e-3, 1e-3);
    const auto ab = pde::compare(a, b), ba = pde::compare(b, a);
    CHECK(ab.l_inf == ba.l_inf);
    CHECK(ab.l2 == ba.l2);
    for (std::size_t k = 0; k < ab.stamps.size(); ++k) {
        CHECK(ab.stamps[k].l_inf == ba.stamps[k].l_inf);
        CHECK(ab.stamps[k].l2 == ba.stamps[k].l2);
    }
    const auto self = pde::compare(a, a);
    CHECK(self.l_inf == 0.0);
    CHECK(self.l2 == 0.0);
    CHECK_THROWS_AS(pde::compare(a, run_heat(101)), rdsym::ValidationError);
}

TEST_CASE("porous Lotka-Volterra run matches the closed form") {
    const auto f201 = run_porous(201);
    const auto app = porous_app();
    const auto exact = [&](double t, double x) { return rdsym::linfam::power_solution(app, t, x); };
    const auto c201 = pde::compare(f201, exact);
    CHECK(c201.l_inf <= 2e-3);
    CHECK(c201.stamps.front().l_inf < 1e-15);
    const auto c101 = pde::compare(run_porous(101), exact);
    CHECK(c101.l_inf / c201.l_inf == doctest::Approx(4).epsilon(0.15));
}

TEST_CASE("guards") {
    const auto ic = FunctionDescriptor::parse("1", {"x"});
    pde::Settings s;
    s.T = 1.0;
    // Degenerate diffusivity.
    CHECK_THROWS_AS(pde::simulate(divergence("U - 1", "1", "0", "0"), ic, ic, pde::Boundary::zero_flux(), {11, 0, 1}, s),
                    rdsym::RuntimeFailure);
    // Fractional power of a negative state.
    const auto neg = FunctionDescriptor::parse("-1", {"x"});
    try {
        pde::simulate(divergence("U^0.5", "1", "0", "0"), neg, ic, pde::Boundary::zero_flux(), {11, 0, 1}, s);
        FAIL("expected failure");
    } catch (const rdsym::RuntimeFailure& e) {
        CHECK(std::string(e.what()).find("evaluation failed") != std::string::npos);
    }
    // U' = U^2 from U = 2 blows up at t = 1/2.
    const auto two = FunctionDescriptor::parse("2", {"x"});
    CHECK_THROWS_AS(pde::simulate(divergence("1", "1", "U^2", "0"), two, ic, pde::Boundary::zero_flux(), {11, 0, 1}, s),
                    rdsym::RuntimeFailure);
    CHECK_THROWS_AS(pde::simulate(heat(), ic, ic, pde::Boundary::zero_flux(), {4, 0, 1}, s), rdsym::ValidationError);
    s.sigma = 0.6;
    CHECK_THROWS_AS(pde::simulate(heat(), ic, ic, pde::Boundary::zero_flux(), {11, 0, 1}, s), rdsym::ValidationError);
    auto transformed = heat();
    transformed.form = Form::transformed;
    s.sigma = 0.4;
    CHECK_THROWS_AS(pde::simulate(transformed, ic, ic, pde::Boundary::zero_flux(), {11, 0, 1}, s), rdsym::ValidationError);
}

TEST_CASE("csv and metadata") {
    const auto f = run_heat(11 + 40);
    const auto csv = f.to_csv();
    CHECK(csv.rfind("t,x,U,V\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 51);
    const auto meta = f.metadata();
    CHECK(meta["grid"]["n"] == 51);
    CHECK(meta["boundary"] == "zero-flux");
    CHECK(meta["dt"]["steps"] == f.steps);
    CHECK(run_heat(51).to_csv() == csv);
}

TEST_CASE("solver agrees across kernel backends") {
    if (!simd::supported(simd::Backend::avx2)) {
        MESSAGE("avx2 unavailable; skipped");
        return;
    }
    const auto before = simd::active().backend;
    simd::select(simd::Backend::scalar);
    const auto a = run_porous(101);
    simd::select(simd::Backend::avx2);
    const auto b = run_porous(101);
    simd::select(before);
    CHECK(a.steps == b.steps);
    CHECK(pde::compare(a, b).l_inf < 1e-13);
}
