#include "doctest.h"
#include "rdsym/error.hpp"
#include "rdsym/expr.hpp"
#include "rdsym/function.hpp"
#include "rdsym/simd/kernels.hpp"
#include "support.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

using rdsym::FunctionDescriptor;
using rdsym::expr::Expression;

TEST_CASE("parser evaluates basic expressions") {
    CHECK(FunctionDescriptor::parse("u^2", {"u"})(2.0) == 4.0);
    CHECK(FunctionDescriptor::parse("exp(v)", {"v"})(0.0) == 1.0);
    CHECK(FunctionDescriptor::parse("0.2*cos(sqrt(6)*x)+0.25", {"x"})(0.0) == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("operator precedence and associativity") {
    auto ev = [](const char* s) { return Expression::parse(s, {}).evaluate({}); };
    CHECK(ev("2^3^2") == 512.0);
    CHECK(ev("-2^2") == -4.0);
    CHECK(ev("2^-1") == 0.5);
    CHECK(ev("1-2-3") == -4.0);
    CHECK(ev("8/4/2") == 1.0);
    CHECK(ev("2+3*4") == 14.0);
    CHECK(ev("(2+3)*4") == 20.0);
    CHECK(ev("pi") == std::numbers::pi);
    CHECK(ev("e") == std::numbers::e);
    CHECK(ev("1.5e2") == 150.0);
    CHECK(ev("abs(-3)+ln(e)") == 4.0);
}

TEST_CASE("declared variables shadow constants") {
    const auto f = Expression::parse("e*2", {"e"});
    const double x[1] = {3.0};
    CHECK(f.evaluate(x) == 6.0);
}

TEST_CASE("syntax errors report their position") {
    try {
        (void)Expression::parse("1 + * 2", {});
        FAIL("expected a parse error");
    } catch (const rdsym::ParseError& e) {
        CHECK(e.position() == 4);
    }
    CHECK_THROWS_AS((void)Expression::parse("(1+2", {}), rdsym::ParseError);
    CHECK_THROWS_AS((void)Expression::parse("foo(1)", {}), rdsym::ParseError);
    CHECK_THROWS_AS((void)Expression::parse("u+w", {"u"}), rdsym::ParseError);
    CHECK_THROWS_AS((void)Expression::parse("1 2", {}), rdsym::ParseError);
    CHECK_THROWS_AS((void)Expression::parse("", {}), rdsym::ParseError);
}

TEST_CASE("evaluation errors") {
    const auto f = Expression::parse("ln(u)", {"u"});
    const double bad[1] = {-1.0};
    CHECK_THROWS_AS((void)f.evaluate(bad), rdsym::DomainError);
    const double two[2] = {1.0, 2.0};
    CHECK_THROWS_AS((void)f.evaluate(two), rdsym::ValidationError);
    const auto g = Expression::parse("u^0.5", {"u"});
    CHECK_THROWS_AS((void)g.evaluate(bad), rdsym::DomainError);
    CHECK_THROWS_AS((void)FunctionDescriptor::parse("1/u", {"u"})(0.0), rdsym::DomainError);
}

TEST_CASE("bind substitutes parameters and folds constants") {
    const auto f = Expression::parse("alpha*u + beta^2", {"u", "alpha", "beta"});
    const auto g = f.bind({{"alpha", 2.0}, {"beta", 3.0}});
    REQUIRE(g.arity() == 1);
    CHECK(g.variables().front() == "u");
    const double x[1] = {5.0};
    CHECK(g.evaluate(x) == 19.0);
}

TEST_CASE("derivatives of closed forms are exact and parsed ones accurate") {
    const auto sq = FunctionDescriptor::power(1.0, 2.0, "u");
    CHECK(sq.derivative(3.0) == 6.0);
    CHECK(sq.derivative(3.0, 2) == 2.0);
    const auto psq = FunctionDescriptor::parse("u^2", {"u"});
    CHECK(std::fabs(psq.derivative(3.0) - 6.0) < 1e-8);

    const double h = std::sqrt(6.0);
    const auto c = FunctionDescriptor::parse("cos(sqrt(6)*x)", {"x"});
    const double oracle = -h * h * std::cos(h * 0.0);
    CHECK(std::fabs(c.derivative(0.0, 2) - oracle) < 1e-7);

    const auto k = FunctionDescriptor::constant(4.0, {"u", "v"});
    const double at[2] = {0.3, -1.0};
    CHECK(k.derivative(at, 1, 1) == 0.0);
    CHECK(k.derivative(at, 0, 2) == 0.0);
}

TEST_CASE("property: print then parse reproduces evaluations") {
    // Random expression trees over u, v built from the full grammar.
    testsupport::Gen gen(7);
    std::function<std::string(int)> build = [&](int depth) -> std::string {
        if (depth == 0 || gen.integer(0, 3) == 0) {
            switch (gen.integer(0, 3)) {
                case 0: return "u";
                case 1: return "v";
                case 2: return std::to_string(gen.uniform(0.1, 3.0));
                default: return "pi";
            }
        }
        const std::string a = build(depth - 1);
        const std::string b = build(depth - 1);
        switch (gen.integer(0, 9)) {
            case 0: return a + "+" + b;
            case 1: return a + "-" + b;
            case 2: return a + "*" + b;
            case 3: return "(" + a + ")/(2+sin(" + b + "))";
            case 4: return "(" + a + ")^2";
            case 5: return "sin(" + a + ")";
            case 6: return "cos(" + a + ")";
            case 7: return "exp(sin(" + a + "))";
            case 8: return "sqrt(abs(" + a + "))";
            default: return "-(" + a + ")";
        }
    };
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::string src = build(4);
        const auto f = Expression::parse(src, {"u", "v"});
        const auto g = Expression::parse(f.to_string(), {"u", "v"});
        for (int i = 0; i < 100; ++i) {
            const double p[2] = {gen.uniform(-2, 2), gen.uniform(-2, 2)};
            const double a = f.evaluate(p);
            const double b = g.evaluate(p);
            CHECK(std::fabs(a - b) <= 1e-12 * std::fmax(1.0, std::fabs(a)));
            ++compared;
        }
    }
    CHECK(compared == 6000);
}

TEST_CASE("property: finite differences agree with closed-form derivatives") {
    testsupport::Gen gen(11);
    for (int i = 0; i < 100; ++i) {
        const double c = gen.uniform(0.5, 2.0);
        const double beta = gen.uniform(-2.0, 2.0);
        const double s = gen.uniform(0.5, 2.0);
        for (const auto& f : {FunctionDescriptor::power(c, beta, "s"),
                              FunctionDescriptor::exponential(c, beta, "s"),
                              FunctionDescriptor::affine(c, beta, "s")}) {
            // Same function, but routed through the finite-difference path.
            const auto fd = FunctionDescriptor::composite(
                {"s"}, [f](std::span<const double> p) { return f(p[0]); }, "wrapped");
            for (int order : {1, 2}) {
                const double exact = f.derivative(s, order);
                const double approx = fd.derivative(s, order);
                CHECK(std::fabs(exact - approx) <= 1e-6 * std::fmax(1.0, std::fabs(exact)));
            }
        }
    }
}

TEST_CASE("batched evaluation matches pointwise evaluation on every backend") {
    using namespace rdsym::simd;
    const auto f = Expression::parse("u^2*exp(-v) - 3/(1+u*u) + v^3 - 2*u + sin(v)^2 + u^-2", {"u", "v"});
    testsupport::Gen gen(3);
    const std::size_t n = 1000;
    std::vector<double> u(n), v(n), expected(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = gen.uniform(0.1, 3);
        v[i] = gen.uniform(-2, 2);
        const double p[2] = {u[i], v[i]};
        expected[i] = f.evaluate(p);
    }
    const Backend before = active().backend;
    for (Backend b : {Backend::scalar, Backend::avx2}) {
        if (!supported(b)) continue;
        select(b);
        std::vector<double> out(n);
        const std::span<const double> cols[2] = {u, v};
        f.evaluate_batch(cols, out);
        CHECK(std::memcmp(out.data(), expected.data(), n * sizeof(double)) == 0);
    }
    select(before);
}

TEST_CASE("grid descriptor interpolates a smooth function") {
    rdsym::GridSamples g;
    g.x0 = 0.0;
    g.step = 0.01;
    for (int i = 0; i <= 200; ++i) {
        const double x = g.x0 + g.step * i;
        g.value.push_back(std::sin(x));
        g.first.push_back(std::cos(x));
        g.second.push_back(-std::sin(x));
    }
    const auto f = FunctionDescriptor::grid(g);
    testsupport::Gen gen(5);
    for (int i = 0; i < 100; ++i) {
        const double x = gen.uniform(0.0, 2.0);
        CHECK(std::fabs(f(x) - std::sin(x)) < 1e-13);
        CHECK(std::fabs(f.derivative(x, 1) - std::cos(x)) < 1e-10);
        CHECK(std::fabs(f.derivative(x, 2) + std::sin(x)) < 1e-7);
    }
    CHECK_THROWS_AS((void)f(2.5), rdsym::DomainError);
}
