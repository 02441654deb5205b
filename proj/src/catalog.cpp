#include "rdsym/catalog.hpp"

#include "rdsym/error.hpp"
#include "rdsym/expr.hpp"
#include "rdsym/ode.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace rdsym::catalog {
namespace {

struct TermText {
    std::string coef = "1";
    std::string pu = "0";
    std::string pv = "0";
    std::string eu = "0";
    std::string ev = "0";
    Core core = Core::one;
    ArgShape shape = ArgShape::linear;
    std::array<std::string, 4> arg{"0", "0", "0", "0"};
    bool free = false;
};

enum class Exclusion { none, power_alpha, exp_alpha, exp_one };

struct Restriction {
    std::string text;
    std::vector<std::string> nonzero;
};

struct Recipe {
    int id;
    std::vector<std::string> params;
    std::string d1;  // empty: arbitrary
    std::string d2;
    std::vector<TermText> cu;
    std::vector<TermText> cv;
    std::string xi0;
    std::string r1 = "0";
    std::string p1 = "0";
    std::string p1_factor;  // multiplies p(x) in p1 when non-empty
    std::string r2 = "0";
    std::string p2 = "0";
    std::vector<Restriction> restrictions;
    Exclusion exclusion = Exclusion::none;
    std::string ode_a;
    std::string ode_b;
    std::string ode_text;
    std::string text_cu;
    std::string text_cv;
    std::string text_op;
};

Recipe make_recipe(int id, std::vector<std::string> params) {
    Recipe r{};
    r.id = id;
    r.params = std::move(params);
    return r;
}

TermText arbitrary(Core core, ArgShape shape, std::array<std::string, 4> arg, std::string pu = "0",
                   std::string pv = "0") {
    TermText t;
    t.core = core;
    t.shape = shape;
    t.arg = std::move(arg);
    t.pu = std::move(pu);
    t.pv = std::move(pv);
    return t;
}

TermText monomial(std::string coef, std::string pu = "0", std::string pv = "0", std::string eu = "0",
                  std::string ev = "0", Core core = Core::one) {
    TermText t;
    t.coef = std::move(coef);
    t.pu = std::move(pu);
    t.pv = std::move(pv);
    t.eu = std::move(eu);
    t.ev = std::move(ev);
    t.core = core;
    return t;
}

TermText free_term(TermText t) {
    t.free = true;
    return t;
}

const ArgShape P = ArgShape::product;
const ArgShape L = ArgShape::linear;

const std::vector<Recipe>& recipes() {
    static const std::vector<Recipe> table = [] {
        std::vector<Recipe> r;

        {
            Recipe c = make_recipe(1, {"alpha", "beta"});
            c.d2 = "v^beta";
            c.cu = {arbitrary(Core::f, P, {"-alpha", "beta", "0", "0"}, "1"), monomial("-1/alpha", "1", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, P, {"-alpha", "beta", "0", "0"}, "0", "1"), monomial("-1/beta", "0", "1+beta")};
            c.xi0 = "exp(t)";
            c.r1 = "exp(t)/alpha";
            c.r2 = "exp(t)/beta";
            c.restrictions = {{"alpha*beta != 0", {"alpha", "beta"}}};
            c.exclusion = Exclusion::power_alpha;
            c.text_cu = "u*(f(v^beta*u^(-alpha)) - d1(u)/alpha)";
            c.text_cv = "v*(g(v^beta*u^(-alpha)) - v^beta/beta)";
            c.text_op = "exp(t)*(d_t + (u/alpha) d_u + (v/beta) d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(2, {"alpha"});
            c.d2 = "exp(v)";
            c.cu = {arbitrary(Core::f, P, {"-alpha", "0", "0", "1"}, "1"), monomial("-1", "1", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, P, {"-alpha", "0", "0", "1"}), monomial("-alpha", "0", "0", "0", "1")};
            c.xi0 = "exp(alpha*t)";
            c.r1 = "exp(alpha*t)";
            c.p2 = "alpha*exp(alpha*t)";
            c.restrictions = {{"alpha != 0", {"alpha"}}};
            c.exclusion = Exclusion::power_alpha;
            c.text_cu = "u*(f(exp(v)*u^(-alpha)) - d1(u))";
            c.text_cv = "g(exp(v)*u^(-alpha)) - alpha*exp(v)";
            c.text_op = "exp(alpha*t)*(d_t + u d_u + alpha d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(3, {"alpha"});
            c.d2 = "exp(v)";
            c.cu = {arbitrary(Core::f, L, {"-alpha", "1", "0", "0"}), monomial("-1", "0", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, L, {"-alpha", "1", "0", "0"}), monomial("-alpha", "0", "0", "0", "1")};
            c.xi0 = "exp(alpha*t)";
            c.p1 = "exp(alpha*t)";
            c.p2 = "alpha*exp(alpha*t)";
            c.restrictions = {{"alpha != 0", {"alpha"}}};
            c.exclusion = Exclusion::exp_alpha;
            c.text_cu = "f(v - alpha*u) - d1(u)";
            c.text_cv = "g(v - alpha*u) - alpha*exp(v)";
            c.text_op = "exp(alpha*t)*(d_t + d_u + alpha d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(4, {"beta"});
            c.d2 = "v^beta";
            c.cu = {arbitrary(Core::f, P, {"0", "beta", "-1", "0"}), monomial("-1", "0", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, P, {"0", "beta", "-1", "0"}, "0", "1"), monomial("-1/beta", "0", "1+beta")};
            c.xi0 = "exp(t)";
            c.p1 = "exp(t)";
            c.r2 = "exp(t)/beta";
            c.restrictions = {{"beta != 0", {"beta"}}};
            c.exclusion = Exclusion::exp_one;
            c.text_cu = "f(v^beta*exp(-u)) - d1(u)";
            c.text_cv = "v*(g(v^beta*exp(-u)) - v^beta/beta)";
            c.text_op = "exp(t)*(d_t + d_u + (v/beta) d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(5, {"alpha", "beta", "lambda"});
            c.d2 = "v^beta";
            c.cu = {arbitrary(Core::f, L, {"1", "0", "0", "0"})};
            c.cv = {arbitrary(Core::g, L, {"1", "0", "0", "0"}, "0", "1"), monomial("-alpha/beta", "0", "1+beta")};
            c.xi0 = "lambda + exp(alpha*t)";
            c.r2 = "alpha/beta*exp(alpha*t)";
            c.restrictions = {{"alpha*beta != 0", {"alpha", "beta"}}};
            c.text_cu = "f(u)";
            c.text_cv = "v*(g(u) - (alpha/beta)*v^beta)";
            c.text_op = "(lambda + exp(alpha*t)) d_t + (alpha/beta)*exp(alpha*t)*v d_v";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(6, {"alpha", "lambda"});
            c.d2 = "exp(v)";
            c.cu = {arbitrary(Core::f, L, {"1", "0", "0", "0"})};
            c.cv = {arbitrary(Core::g, L, {"1", "0", "0", "0"}), monomial("-alpha", "0", "0", "0", "1")};
            c.xi0 = "lambda + exp(alpha*t)";
            c.p2 = "alpha*exp(alpha*t)";
            c.restrictions = {{"alpha != 0", {"alpha"}}};
            c.text_cu = "f(u)";
            c.text_cv = "g(u) - alpha*exp(v)";
            c.text_op = "(lambda + exp(alpha*t)) d_t + alpha*exp(alpha*t) d_v";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(7, {"beta"});
            c.d2 = "v^beta";
            c.cu = {arbitrary(Core::f, L, {"1", "0", "0", "0"})};
            c.cv = {arbitrary(Core::g, L, {"1", "0", "0", "0"}, "0", "1")};
            c.xi0 = "t";
            c.r2 = "1/beta";
            c.restrictions = {{"beta != 0", {"beta"}}};
            c.text_cu = "f(u)";
            c.text_cv = "v*g(u)";
            c.text_op = "t d_t + (v/beta) d_v";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(8, {});
            c.d2 = "exp(v)";
            c.cu = {arbitrary(Core::f, L, {"1", "0", "0", "0"})};
            c.cv = {arbitrary(Core::g, L, {"1", "0", "0", "0"})};
            c.xi0 = "t";
            c.p2 = "1";
            c.text_cu = "f(u)";
            c.text_cv = "g(u)";
            c.text_op = "t d_t + d_v";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(9, {"alpha"});
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}, "1"), monomial("-alpha", "1", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.r1 = "alpha";
            c.restrictions = {{"alpha != 0", {"alpha"}}};
            c.text_cu = "u*(f(v) - alpha*d1(u))";
            c.text_cv = "g(v)";
            c.text_op = "d_t + alpha*u d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(10, {"alpha", "beta", "lambda"});
            c.d1 = "u^beta";
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}, "1"), monomial("-alpha/beta", "1+beta")};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.r1 = "exp(alpha*t)/(lambda + exp(alpha*t))*alpha/beta";
            c.restrictions = {{"lambda*alpha*beta != 0", {"lambda", "alpha", "beta"}}};
            c.text_cu = "u*(f(v) - (alpha/beta)*u^beta)";
            c.text_cv = "g(v)";
            c.text_op = "d_t + exp(alpha*t)/(lambda + exp(alpha*t))*(alpha/beta)*u d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(11, {"beta"});
            c.d1 = "u^beta";
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}, "1")};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.r1 = "1/(beta*t)";
            c.restrictions = {{"beta != 0", {"beta"}}};
            c.text_cu = "u*f(v)";
            c.text_cv = "g(v)";
            c.text_op = "d_t + u/(beta*t) d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(12, {"alpha"});
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}), monomial("-alpha", "0", "0", "0", "0", Core::d1)};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.p1 = "alpha";
            c.restrictions = {{"alpha != 0", {"alpha"}}};
            c.text_cu = "f(v) - alpha*d1(u)";
            c.text_cv = "g(v)";
            c.text_op = "d_t + alpha d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(13, {"alpha", "lambda"});
            c.d1 = "exp(u)";
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}), monomial("-alpha", "0", "0", "1")};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.p1 = "alpha*exp(alpha*t)/(lambda + exp(alpha*t))";
            c.restrictions = {{"lambda*alpha != 0", {"lambda", "alpha"}}};
            c.text_cu = "f(v) - alpha*exp(u)";
            c.text_cv = "g(v)";
            c.text_op = "d_t + alpha*exp(alpha*t)/(lambda + exp(alpha*t)) d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(14, {});
            c.d1 = "exp(u)";
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"})};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.p1 = "1/t";
            c.text_cu = "f(v)";
            c.text_cv = "g(v)";
            c.text_op = "d_t + (1/t) d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(15, {"alpha"});
            c.d1 = "u";
            c.cu = {arbitrary(Core::f, L, {"0", "1", "0", "0"}), monomial("alpha", "1")};
            c.cv = {arbitrary(Core::g, L, {"0", "1", "0", "0"})};
            c.xi0 = "1";
            c.p1_factor = "1";
            c.ode_a = "alpha";
            c.ode_b = "0";
            c.ode_text = "p'' = p^2 + alpha*p";
            c.text_cu = "f(v) + alpha*u";
            c.text_cv = "g(v)";
            c.text_op = "d_t + p(x) d_u";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(16, {"alpha1", "alpha2", "alpha3", "alpha4"});
            c.d1 = "u";
            c.d2 = "exp(v)";
            c.cu = {monomial("alpha1", "0", "1"), monomial("alpha2", "1"), free_term(monomial("alpha3"))};
            c.cv = {free_term(monomial("alpha4")), monomial("-1", "0", "0", "0", "1")};
            c.xi0 = "exp(t)";
            c.p1_factor = "exp(t)";
            c.p2 = "exp(t)";
            c.restrictions = {{"alpha1 != 0", {"alpha1"}}};
            c.ode_a = "alpha2";
            c.ode_b = "alpha1";
            c.ode_text = "p'' = p^2 + alpha2*p + alpha1";
            c.text_cu = "alpha1*v + alpha2*u + alpha3";
            c.text_cv = "alpha4 - exp(v)";
            c.text_op = "exp(t)*(d_t + p(x) d_u + d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(17, {"alpha1", "alpha2", "alpha3", "alpha4", "beta"});
            c.d1 = "u";
            c.d2 = "v^beta";
            c.cu = {monomial("alpha1", "0", "0", "0", "0", Core::ln_v), monomial("alpha2", "1"), free_term(monomial("alpha3"))};
            c.cv = {free_term(monomial("alpha4", "0", "1")), monomial("-1", "0", "1+beta")};
            c.xi0 = "exp(beta*t)";
            c.p1_factor = "exp(beta*t)";
            c.r2 = "exp(beta*t)";
            c.restrictions = {{"alpha1*beta != 0", {"alpha1", "beta"}}};
            c.ode_a = "alpha2";
            c.ode_b = "alpha1";
            c.ode_text = "p'' = p^2 + alpha2*p + alpha1";
            c.text_cu = "alpha1*ln(v) + alpha2*u + alpha3";
            c.text_cv = "v*(alpha4 - v^beta)";
            c.text_op = "exp(beta*t)*(d_t + p(x) d_u + v d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(18, {"alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "beta"});
            c.d1 = "u";
            c.d2 = "v^beta";
            c.cu = {free_term(monomial("alpha2", "0", "1/alpha1")), monomial("alpha3", "1"), monomial("alpha4"),
                    monomial("-1", "2")};
            c.cv = {free_term(monomial("alpha5", "0", "1")), monomial("-alpha1", "0", "1+beta")};
            c.xi0 = "exp(alpha1*beta*t)";
            c.r1 = "exp(alpha1*beta*t)";
            c.p1_factor = "exp(alpha1*beta*t)";
            c.r2 = "alpha1*exp(alpha1*beta*t)";
            c.restrictions = {{"alpha1*beta != 0", {"alpha1", "beta"}}};
            c.ode_a = "alpha3";
            c.ode_b = "-alpha4";
            c.ode_text = "p'' = p^2 + alpha3*p - alpha4";
            c.text_cu = "alpha2*v^(1/alpha1) + alpha3*u + alpha4 - u^2";
            c.text_cv = "v*(alpha5 - alpha1*v^beta)";
            c.text_op = "exp(alpha1*beta*t)*(d_t + (p(x) + u) d_u + alpha1*v d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(19, {"alpha1", "alpha2", "alpha3", "alpha4", "alpha5"});
            c.d1 = "u";
            c.d2 = "exp(v)";
            c.cu = {free_term(monomial("alpha2", "0", "0", "0", "1/alpha1")), monomial("alpha3", "1"), monomial("alpha4"),
                    monomial("-1", "2")};
            c.cv = {free_term(monomial("alpha5")), monomial("-alpha1", "0", "0", "0", "1")};
            c.xi0 = "exp(alpha1*t)";
            c.r1 = "exp(alpha1*t)";
            c.p1_factor = "exp(alpha1*t)";
            c.p2 = "alpha1*exp(alpha1*t)";
            c.restrictions = {{"alpha1*alpha2 != 0", {"alpha1", "alpha2"}}};
            c.ode_a = "alpha3";
            c.ode_b = "-alpha4";
            c.ode_text = "p'' = p^2 + alpha3*p - alpha4";
            c.text_cu = "alpha2*exp(v/alpha1) + alpha3*u + alpha4 - u^2";
            c.text_cv = "alpha5 - alpha1*exp(v)";
            c.text_op = "exp(alpha1*t)*(d_t + (p(x) + u) d_u + alpha1 d_v)";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(20, {"alpha1", "alpha2", "alpha3", "beta"});
            c.d1 = "u^(-1)";
            c.d2 = "v^beta";
            c.cu = {free_term(monomial("alpha1", "0", "-beta")), monomial("alpha2", "-1")};
            c.cv = {free_term(monomial("alpha3", "0", "1"))};
            c.xi0 = "t";
            c.r1 = "-1";
            c.p1 = "-alpha2*t";
            c.r2 = "1/beta";
            c.restrictions = {{"alpha1*alpha2*beta != 0", {"alpha1", "alpha2", "beta"}}};
            c.text_cu = "alpha1*v^(-beta) + alpha2/u";
            c.text_cv = "alpha3*v";
            c.text_op = "t d_t - (u + alpha2*t) d_u + (v/beta) d_v";
            r.push_back(c);
        }
        {
            Recipe c = make_recipe(21, {"alpha1", "alpha2", "alpha3"});
            c.d1 = "u^(-1)";
            c.d2 = "exp(v)";
            c.cu = {free_term(monomial("alpha1", "0", "0", "0", "-1")), monomial("alpha2", "-1")};
            c.cv = {free_term(monomial("alpha3"))};
            c.xi0 = "t";
            c.r1 = "-1";
            c.p1 = "-alpha2*t";
            c.p2 = "1";
            c.restrictions = {{"alpha1*alpha2 != 0", {"alpha1", "alpha2"}}};
            c.text_cu = "alpha1*exp(-v) + alpha2/u";
            c.text_cv = "alpha3";
            c.text_op = "t d_t - (u + alpha2*t) d_u + d_v";
            r.push_back(c);
        }
        return r;
    }();
    return table;
}

const Recipe& recipe(int id) {
    if (id < 1 || id > kCaseCount) {
        throw ValidationError("case id must be between 1 and " + std::to_string(kCaseCount) + ", got " +
                              std::to_string(id));
    }
    return recipes()[static_cast<std::size_t>(id - 1)];
}

bool uses(const std::vector<TermText>& terms, Core core) {
    return std::any_of(terms.begin(), terms.end(), [&](const TermText& t) { return t.core == core; });
}

CaseInfo make_info(const Recipe& r) {
    CaseInfo i;
    i.id = r.id;
    i.parameters = r.params;
    if (r.d1.empty()) i.functions.push_back("d1");
    if (r.d2.empty()) i.functions.push_back("d2");
    if (uses(r.cu, Core::f) || uses(r.cv, Core::f)) i.functions.push_back("f");
    if (uses(r.cu, Core::g) || uses(r.cv, Core::g)) i.functions.push_back("g");
    for (const auto& res : r.restrictions) i.restrictions.push_back(res.text);
    i.d1 = r.d1.empty() ? "d1(u)" : r.d1;
    i.d2 = r.d2.empty() ? "d2(v)" : r.d2;
    i.kinetics_u = r.text_cu;
    i.kinetics_v = r.text_cv;
    i.operator_text = r.text_op;
    i.ode_defined = !r.p1_factor.empty();
    i.ode_constraint = r.ode_text;
    switch (r.exclusion) {
        case Exclusion::power_alpha: i.excluded_d1 = "d1 != lambda*u^alpha"; break;
        case Exclusion::exp_alpha: i.excluded_d1 = "d1 != lambda*exp(alpha*u)"; break;
        case Exclusion::exp_one: i.excluded_d1 = "d1 != lambda*exp(u)"; break;
        case Exclusion::none: break;
    }
    return i;
}

double number(const std::string& text, const std::map<std::string, double>& params) {
    std::vector<std::string> names;
    std::vector<double> values;
    for (const auto& [k, v] : params) {
        names.push_back(k);
        values.push_back(v);
    }
    return expr::Expression::parse(text, names).evaluate(values);
}

Term bind_term(const TermText& t, const std::map<std::string, double>& params) {
    Term out;
    out.coef = number(t.coef, params);
    out.pu = number(t.pu, params);
    out.pv = number(t.pv, params);
    out.eu = number(t.eu, params);
    out.ev = number(t.ev, params);
    out.core = t.core;
    out.shape = t.shape;
    for (std::size_t k = 0; k < 4; ++k) out.arg[k] = number(t.arg[k], params);
    out.free = t.free;
    return out;
}

double real_power(double base, double exponent) {
    if (exponent == 0.0) return 1.0;
    if (exponent == std::trunc(exponent) && std::fabs(exponent) <= 64.0) {
        if (base == 0.0 && exponent < 0.0) throw DomainError("negative power of zero");
        return expr::integer_power(base, static_cast<std::int32_t>(exponent));
    }
    if (base < 0.0 || (base == 0.0 && exponent < 0.0)) {
        throw DomainError("fractional power of non-positive base " + std::to_string(base));
    }
    return std::pow(base, exponent);
}

double argument(const Term& t, double u, double v) {
    if (t.shape == ArgShape::linear) return t.arg[0] * u + t.arg[1] * v;
    return real_power(u, t.arg[0]) * real_power(v, t.arg[1]) * std::exp(t.arg[2] * u + t.arg[3] * v);
}

double term_value(const Term& t, double u, double v, const FunctionDescriptor& d1, const FunctionDescriptor* f,
                  const FunctionDescriptor* g) {
    double core = 1.0;
    switch (t.core) {
        case Core::one: break;
        case Core::d1: core = d1(u); break;
        case Core::ln_v:
            if (!(v > 0.0)) throw DomainError("ln of non-positive v");
            core = std::log(v);
            break;
        case Core::f: core = (*f)(argument(t, u, v)); break;
        case Core::g: core = (*g)(argument(t, u, v)); break;
    }
    double value = t.coef * real_power(u, t.pu) * real_power(v, t.pv) * core;
    if (t.eu != 0.0 || t.ev != 0.0) value *= std::exp(t.eu * u + t.ev * v);
    return value;
}

void require_function(const std::map<std::string, FunctionDescriptor>& functions, const std::string& name,
                      std::size_t arity) {
    const auto it = functions.find(name);
    if (it == functions.end()) throw ValidationError("missing user function '" + name + "'");
    if (it->second.arity() != arity) {
        throw ValidationError("user function '" + name + "' must take " + std::to_string(arity) + " argument(s)");
    }
}

bool nonconstant_closed(const FunctionDescriptor& d) {
    const auto& c = d.closed_form();
    if (!c) return true;
    switch (c->tag) {
        case FunctionDescriptor::Kind::constant: return false;
        case FunctionDescriptor::Kind::power: return c->coefficient != 0.0 && c->parameter != 0.0;
        case FunctionDescriptor::Kind::exponential: return c->coefficient != 0.0 && c->parameter != 0.0;
        case FunctionDescriptor::Kind::affine: return c->coefficient != 0.0;
        default: return true;
    }
}

FunctionDescriptor with_p(const FunctionDescriptor& base, const FunctionDescriptor& factor, const FunctionDescriptor& p) {
    return FunctionDescriptor::composite(
        {"t", "x"},
        [base, factor, p](std::span<const double> at) { return base(at) + factor(at) * p(at[1]); },
        base.describe() + " + (" + factor.describe() + ")*p(x)");
}

// Composite of (t, x) evaluating `fn` at the pre-image of an affine map.
FunctionDescriptor remap(std::function<double(double, double)> fn, std::string label) {
    return FunctionDescriptor::composite(
        {"t", "x"}, [fn = std::move(fn)](std::span<const double> at) { return fn(at[0], at[1]); }, std::move(label));
}

}  // namespace

std::vector<CaseInfo> list_cases() {
    std::vector<CaseInfo> out;
    for (const auto& r : recipes()) out.push_back(make_info(r));
    return out;
}

const CaseInfo& info(int id) {
    static const std::vector<CaseInfo> all = list_cases();
    (void)recipe(id);
    return all[static_cast<std::size_t>(id - 1)];
}

std::pair<double, double> p_ode(int id, const std::map<std::string, double>& params) {
    const Recipe& r = recipe(id);
    if (r.ode_a.empty()) throw ValidationError("case " + std::to_string(id) + " has no p(x) equation");
    return {number(r.ode_a, params), number(r.ode_b, params)};
}

FunctionDescriptor solve_p(double a, double b, const PSettings& s) {
    if (!(s.step > 0.0)) throw ValidationError("p(x) step must be positive");
    if (!(s.lo <= s.x_init && s.x_init <= s.hi && s.lo < s.hi)) {
        throw ValidationError("p(x) initial point must lie inside [lo, hi]");
    }
    auto rhs = [a, b](double, const std::array<double, 2>& y) {
        return std::array<double, 2>{y[1], y[0] * y[0] + a * y[0] + b};
    };
    // Pick a step that divides both sub-intervals into whole numbers of steps
    // on one common uniform grid.
    const double total = s.hi - s.lo;
    const auto n = static_cast<std::size_t>(std::ceil(total / s.step - 1e-9));
    const double h = total / static_cast<double>(n);
    const auto left_steps = static_cast<std::size_t>(std::llround((s.x_init - s.lo) / h));
    const double x_init = s.lo + h * static_cast<double>(left_steps);
    if (std::fabs(x_init - s.x_init) > 1e-12 * std::fmax(1.0, std::fabs(s.x_init))) {
        throw ValidationError("p(x) initial point must fall on the integration grid (lo + k*step)");
    }
    const std::array<double, 2> y0{s.p0, s.dp0};
    GridSamples g;
    g.x0 = s.lo;
    g.step = h;
    g.value.assign(n + 1, 0.0);
    g.first.assign(n + 1, 0.0);
    g.second.assign(n + 1, 0.0);
    auto store = [&](std::size_t index, const std::array<double, 2>& y) {
        g.value[index] = y[0];
        g.first[index] = y[1];
        g.second[index] = y[0] * y[0] + a * y[0] + b;
    };
    if (left_steps > 0) {
        const auto left = ode::rk4<2>(rhs, s.x_init, y0, s.lo, h * (1 + 1e-12));
        for (std::size_t k = 0; k < left.y.size(); ++k) store(left_steps - k, left.y[k]);
    }
    if (left_steps < n) {
        const auto right = ode::rk4<2>(rhs, s.x_init, y0, s.hi, h * (1 + 1e-12));
        for (std::size_t k = 0; k < right.y.size(); ++k) store(left_steps + k, right.y[k]);
    }
    store(left_steps, y0);
    return FunctionDescriptor::grid(std::move(g), "x");
}

SymmetryOperator make_operator(int id, const std::map<std::string, double>& params,
                               const std::optional<FunctionDescriptor>& p) {
    const Recipe& r = recipe(id);
    for (const auto& name : r.params) {
        if (params.find(name) == params.end()) {
            throw ValidationError("case " + std::to_string(id) + ": missing parameter '" + name + "'");
        }
    }
    SymmetryOperator op = zero_operator();
    op.time_coeff = coefficient(r.xi0, params);
    op.u_slope = coefficient(r.r1, params);
    op.u_shift = coefficient(r.p1, params);
    op.v_slope = coefficient(r.r2, params);
    op.v_shift = coefficient(r.p2, params);
    op.manifold = Manifold::u;
    if (!r.p1_factor.empty()) {
        if (!p) throw ValidationError("case " + std::to_string(id) + " operator needs p(x)");
        op.u_shift = with_p(op.u_shift, coefficient(r.p1_factor, params), *p);
    }
    return op;
}

std::pair<FunctionDescriptor, FunctionDescriptor> build_kinetics(
    const Kinetics& kinetics, const FunctionDescriptor& d1, const std::map<std::string, FunctionDescriptor>& functions) {
    auto lookup = [&](const char* name) -> std::shared_ptr<FunctionDescriptor> {
        const auto it = functions.find(name);
        return it == functions.end() ? nullptr : std::make_shared<FunctionDescriptor>(it->second);
    };
    const auto f = lookup("f");
    const auto g = lookup("g");
    auto make = [&](const std::vector<Term>& terms, const char* label) {
        for (const auto& t : terms) {
            if ((t.core == Core::f && !f) || (t.core == Core::g && !g)) {
                throw ValidationError(std::string("kinetics need user function '") + (t.core == Core::f ? "f" : "g") + "'");
            }
        }
        return FunctionDescriptor::composite(
            {"u", "v"},
            [terms, d1, f, g](std::span<const double> p) {
                double sum = 0.0;
                for (const auto& t : terms) sum += term_value(t, p[0], p[1], d1, f.get(), g.get());
                return sum;
            },
            label);
    };
    return {make(kinetics.u, "C1(u,v)"), make(kinetics.v, "C2(u,v)")};
}

Instance instantiate(int id, const std::map<std::string, double>& params,
                     const std::map<std::string, FunctionDescriptor>& functions, std::optional<PSettings> p_settings) {
    const Recipe& r = recipe(id);
    const CaseInfo& ci = info(id);
    Instance out;
    out.id = id;

    for (const auto& name : r.params) {
        if (params.find(name) == params.end()) throw ValidationError("case " + std::to_string(id) + ": missing parameter '" + name + "'");
        if (!std::isfinite(params.at(name))) throw ValidationError("parameter '" + name + "' must be finite");
    }
    for (const auto& [name, value] : params) {
        (void)value;
        if (std::find(r.params.begin(), r.params.end(), name) == r.params.end()) {
            throw ValidationError("case " + std::to_string(id) + " has no parameter '" + name + "'");
        }
    }
    for (const auto& [name, fn] : functions) {
        (void)fn;
        if (std::find(ci.functions.begin(), ci.functions.end(), name) == ci.functions.end()) {
            throw ValidationError("case " + std::to_string(id) + " does not take a user function '" + name + "'");
        }
    }
    // Exact comparison: parameters are inputs, not computed values.
    for (const auto& res : r.restrictions) {
        for (const auto& name : res.nonzero) {
            if (params.at(name) == 0.0) throw ValidationError("restriction " + res.text + " violated");
        }
    }
    for (const auto& name : ci.functions) require_function(functions, name, 1);

    RDSystem& sys = out.system;
    sys.form = Form::transformed;
    if (r.d1.empty()) {
        sys.diffusivity_u = functions.at("d1");
    } else if (r.d1 == "u") {
        sys.diffusivity_u = FunctionDescriptor::power(1.0, 1.0, "u");
    } else if (r.d1 == "u^(-1)") {
        sys.diffusivity_u = FunctionDescriptor::power(1.0, -1.0, "u");
    } else if (r.d1 == "u^beta") {
        sys.diffusivity_u = FunctionDescriptor::power(1.0, params.at("beta"), "u");
    } else {
        sys.diffusivity_u = FunctionDescriptor::exponential(1.0, 1.0, "u");
    }
    if (r.d2.empty()) {
        sys.diffusivity_v = functions.at("d2");
    } else if (r.d2 == "v^beta") {
        sys.diffusivity_v = FunctionDescriptor::power(1.0, params.at("beta"), "v");
    } else {
        sys.diffusivity_v = FunctionDescriptor::exponential(1.0, 1.0, "v");
    }
    if (!nonconstant_closed(sys.diffusivity_u) || !nonconstant_closed(sys.diffusivity_v)) {
        throw ValidationError("restriction d1_u * d2_v != 0 violated: diffusivities must be non-constant");
    }

    if (r.exclusion != Exclusion::none && r.d1.empty()) {
        const auto& c = sys.diffusivity_u.closed_form();
        if (c) {
            using Kind = FunctionDescriptor::Kind;
            const double alpha = params.count("alpha") ? params.at("alpha") : 0.0;
            const bool hit = (r.exclusion == Exclusion::power_alpha && c->tag == Kind::power && c->parameter == alpha) ||
                             (r.exclusion == Exclusion::exp_alpha && c->tag == Kind::exponential && c->parameter == alpha) ||
                             (r.exclusion == Exclusion::exp_one && c->tag == Kind::exponential && c->parameter == 1.0);
            if (hit) throw ValidationError("restriction " + ci.excluded_d1 + " violated");
        } else {
            out.warnings.push_back("restriction " + ci.excluded_d1 +
                                   " cannot be checked for a non-tagged d1; assumed to hold");
        }
    }

    for (const auto& t : r.cu) out.kinetics.u.push_back(bind_term(t, params));
    for (const auto& t : r.cv) out.kinetics.v.push_back(bind_term(t, params));
    std::tie(sys.kinetics_u, sys.kinetics_v) = build_kinetics(out.kinetics, sys.diffusivity_u, functions);

    if (!r.p1_factor.empty()) {
        if (!p_settings) throw ValidationError("case " + std::to_string(id) + " needs initial data for p(x) (p_init)");
        const auto [a, b] = p_ode(id, params);
        out.p = solve_p(a, b, *p_settings);
    }
    out.op = make_operator(id, params, out.p);
    return out;
}

std::pair<RDSystem, SymmetryOperator> apply_equivalence(const RDSystem& sys, const SymmetryOperator& op,
                                                        const Equivalence& e) {
    if (sys.form != Form::transformed) throw ValidationError("equivalence transformations act on the transformed form");
    const auto& c = e.c;
    for (int k : {0, 2, 4, 6}) {
        if (c[static_cast<std::size_t>(k)] == 0.0) {
            throw ValidationError("equivalence scaling constant C" + std::to_string(k + 1) + " must be nonzero");
        }
    }
    const double C1 = c[0], C2 = c[1], C3 = c[2], C4 = c[3], C5 = c[4], C6 = c[5], C7 = c[6], C8 = c[7];

    RDSystem out;
    out.form = Form::transformed;
    const auto d1 = sys.diffusivity_u;
    const auto d2 = sys.diffusivity_v;
    const auto K1 = sys.kinetics_u;
    const auto K2 = sys.kinetics_v;
    const double s1 = C1 / (C3 * C3);
    out.diffusivity_u = FunctionDescriptor::composite(
        {"u"}, [d1, s1, C5, C6](std::span<const double> p) { return s1 * d1((p[0] - C6) / C5); }, "mapped d1");
    out.diffusivity_v = FunctionDescriptor::composite(
        {"v"}, [d2, s1, C7, C8](std::span<const double> p) { return s1 * d2((p[0] - C8) / C7); }, "mapped d2");
    const double k1 = C5 / (C3 * C3);
    const double k2 = C7 / (C3 * C3);
    out.kinetics_u = FunctionDescriptor::composite(
        {"u", "v"},
        [K1, k1, C5, C6, C7, C8](std::span<const double> p) { return k1 * K1((p[0] - C6) / C5, (p[1] - C8) / C7); },
        "mapped C1");
    out.kinetics_v = FunctionDescriptor::composite(
        {"u", "v"},
        [K2, k2, C5, C6, C7, C8](std::span<const double> p) { return k2 * K2((p[0] - C6) / C5, (p[1] - C8) / C7); },
        "mapped C2");

    auto at = [C1, C2, C3, C4](const FunctionDescriptor& f) {
        return [f, C1, C2, C3, C4](double t, double x) { return f((t - C2) / C1, (x - C4) / C3); };
    };
    const auto xi0 = at(op.time_coeff);
    const auto xi1 = at(op.space_coeff);
    const auto r1 = at(op.u_slope);
    const auto p1 = at(op.u_shift);
    const auto q = at(op.v_cross);
    const auto r2 = at(op.v_slope);
    const auto p2 = at(op.v_shift);

    SymmetryOperator o;
    o.manifold = op.manifold;
    o.time_coeff = remap([xi0, C1](double t, double x) { return C1 * xi0(t, x); }, "mapped xi0");
    o.space_coeff = remap([xi1, C3](double t, double x) { return C3 * xi1(t, x); }, "mapped xi1");
    o.u_slope = remap(r1, "mapped r1");
    o.u_shift = remap([p1, r1, C5, C6](double t, double x) { return C5 * p1(t, x) - C6 * r1(t, x); }, "mapped p1");
    o.v_cross = remap([q, C5, C7](double t, double x) { return C7 * q(t, x) / C5; }, "mapped q");
    o.v_slope = remap(r2, "mapped r2");
    o.v_shift = remap(
        [p2, q, r2, C5, C6, C7, C8](double t, double x) {
            return C7 * p2(t, x) - C6 * C7 * q(t, x) / C5 - C8 * r2(t, x);
        },
        "mapped p2");
    return {out, o};
}

std::pair<RDSystem, SymmetryOperator> swap(const RDSystem& sys, const SymmetryOperator& op) {
    // The cross term q*u in eta2 would become q*v in eta1, which the
    // operator structure cannot hold.
    for (double t : {0.1, 0.7, 1.3, 2.0}) {
        for (double x : {0.0, 0.5, 1.0, 2.0}) {
            if (op.v_cross(t, x) != 0.0) throw ValidationError("swap requires a vanishing u-coefficient in eta2");
        }
    }
    RDSystem out;
    out.form = sys.form;
    out.frame = sys.frame;
    if (sys.frame) {
        std::swap(out.frame->scale_u, out.frame->scale_v);
        std::swap(out.frame->reference_u, out.frame->reference_v);
    }
    const std::string a = sys.form == Form::transformed ? "u" : "U";
    const std::string b = sys.form == Form::transformed ? "v" : "V";
    const auto d1 = sys.diffusivity_u;
    const auto d2 = sys.diffusivity_v;
    const auto K1 = sys.kinetics_u;
    const auto K2 = sys.kinetics_v;
    out.diffusivity_u = FunctionDescriptor::composite({a}, [d2](std::span<const double> p) { return d2(p[0]); }, "swapped d2");
    out.diffusivity_v = FunctionDescriptor::composite({b}, [d1](std::span<const double> p) { return d1(p[0]); }, "swapped d1");
    out.kinetics_u = FunctionDescriptor::composite({a, b}, [K2](std::span<const double> p) { return K2(p[1], p[0]); }, "swapped C2");
    out.kinetics_v = FunctionDescriptor::composite({a, b}, [K1](std::span<const double> p) { return K1(p[1], p[0]); }, "swapped C1");

    SymmetryOperator o = op;
    o.u_slope = op.v_slope;
    o.u_shift = op.v_shift;
    o.v_slope = op.u_slope;
    o.v_shift = op.u_shift;
    o.v_cross = zero_coefficient();
    o.manifold = op.manifold == Manifold::u ? Manifold::v : Manifold::u;
    return {out, o};
}

std::string function_variable(const std::string& name) {
    if (name == "d1") return "u";
    if (name == "d2") return "v";
    if (name == "f" || name == "g") return "w";
    throw ValidationError("unknown user function '" + name + "' (expected d1, d2, f or g)");
}

Draw random_draw(int id, std::uint64_t seed) {
    const Recipe& r = recipe(id);
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(id));
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto magnitude = [&] { return uniform(0.5, 1.5) * (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0); };
    auto fmt = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };

    Draw d;
    for (int attempt = 0;; ++attempt) {
        d.params.clear();
        for (const auto& name : r.params) d.params[name] = name == "lambda" ? uniform(0.5, 1.5) : magnitude();
        if (r.ode_a.empty()) break;
        const auto [a, b] = p_ode(id, d.params);
        if (a * a - 4.0 * b > 0.25) break;
        if (attempt > 1000) throw RuntimeFailure("could not draw an admissible p(x) equation");
    }
    const CaseInfo& ci = info(id);
    for (const auto& name : ci.functions) {
        if (name == "d1" || name == "d2") {
            d.functions[name] = "1 + " + fmt(uniform(0.5, 1.5)) + "*" + function_variable(name) + "^2";
        } else {
            d.functions[name] =
                fmt(magnitude()) + " + " + fmt(magnitude()) + "*w + " + fmt(magnitude()) + "*sin(w)";
        }
    }
    if (!r.ode_a.empty()) {
        const auto [a, b] = p_ode(id, d.params);
        const double disc = std::sqrt(a * a - 4.0 * b);
        const double lower = (-a - disc) / 2.0;
        PSettings s;
        s.p0 = lower + 0.2 * disc;
        s.dp0 = 0.0;
        d.p_settings = s;
    }
    return d;
}

Instance instantiate(int id, const Draw& draw) {
    std::map<std::string, FunctionDescriptor> functions;
    for (const auto& [name, source] : draw.functions) {
        functions.emplace(name, FunctionDescriptor::parse(source, {function_variable(name)}));
    }
    return instantiate(id, draw.params, functions, draw.p_settings);
}

std::string Slot::describe() const {
    static const char* names[] = {"coef", "pu", "pv", "eu", "ev", "arg0", "arg1", "arg2", "arg3"};
    return std::string(v_equation ? "C2" : "C1") + " term " + std::to_string(term) + " " +
           names[static_cast<std::size_t>(index)];
}

double& slot_value(Kinetics& kinetics, const Slot& slot) {
    auto& terms = slot.v_equation ? kinetics.v : kinetics.u;
    if (slot.term >= terms.size() || slot.index < 0 || slot.index > 8) throw ValidationError("no such slot");
    Term& t = terms[slot.term];
    switch (slot.index) {
        case 0: return t.coef;
        case 1: return t.pu;
        case 2: return t.pv;
        case 3: return t.eu;
        case 4: return t.ev;
        default: return t.arg[static_cast<std::size_t>(slot.index - 5)];
    }
}

std::vector<Slot> family_changing_slots(const Kinetics& kinetics) {
    std::vector<Slot> out;
    for (int side = 0; side < 2; ++side) {
        const auto& terms = side == 0 ? kinetics.u : kinetics.v;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const Term& t = terms[k];
            const bool arbitrary = t.core == Core::f || t.core == Core::g;
            std::set<int> skip;
            if (arbitrary || t.free) skip.insert(0);
            if (!arbitrary) skip.insert({5, 6, 7, 8});
            if (arbitrary) {
                bool on_u = t.arg[0] != 0.0;
                bool on_v = t.arg[1] != 0.0;
                if (t.shape == ArgShape::linear) {
                    skip.insert({7, 8});
                } else {
                    on_u = on_u || t.arg[2] != 0.0;
                    on_v = on_v || t.arg[3] != 0.0;
                }
                if (on_u && !on_v) skip.insert({1, 3, 5, 7});
                if (on_v && !on_u) skip.insert({2, 4, 6, 8});
            }
            for (int i = 0; i < 9; ++i) {
                if (!skip.count(i)) out.push_back({side == 1, k, i});
            }
        }
    }
    return out;
}

}  // namespace rdsym::catalog
