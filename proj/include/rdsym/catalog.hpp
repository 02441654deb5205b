#pragma once

#include "rdsym/function.hpp"
#include "rdsym/operator.hpp"
#include "rdsym/rdsystem.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rdsym::catalog {

constexpr int kCaseCount = 21;

// One kinetic term: coef * u^pu * v^pv * exp(eu*u + ev*v) * core.
enum class Core { one, d1, ln_v, f, g };

// Argument of an arbitrary function: product u^a v^b exp(c u + d v), or the
// linear combination a*u + b*v.
enum class ArgShape { product, linear };

struct Term {
    double coef = 1.0;
    double pu = 0.0;
    double pv = 0.0;
    double eu = 0.0;
    double ev = 0.0;
    Core core = Core::one;
    ArgShape shape = ArgShape::linear;
    std::array<double, 4> arg{0.0, 0.0, 0.0, 0.0};
    // Free terms carry a parameter the operator does not see; changing them
    // yields another member of the same case.
    bool free = false;
};

struct Kinetics {
    std::vector<Term> u;
    std::vector<Term> v;
};

struct CaseInfo {
    int id = 0;
    std::vector<std::string> parameters;  // e.g. alpha, beta, lambda, alpha1..alpha5
    std::vector<std::string> functions;   // user functions required: d1, d2, f, g
    std::vector<std::string> restrictions;  // human-readable, e.g. "alpha*beta != 0"
    std::string d1;  // text of the fixed diffusivity, or "d1(u)" when arbitrary
    std::string d2;
    std::string kinetics_u;
    std::string kinetics_v;
    std::string operator_text;
    bool ode_defined = false;     // operator contains p(x) solving a second-order ODE
    std::string ode_constraint;   // e.g. "p'' = p^2 + alpha*p"
    std::string excluded_d1;  // e.g. "d1 != lambda*u^alpha"
};

struct Instance {
    int id = 0;
    RDSystem system;
    SymmetryOperator op;
    Kinetics kinetics;  // numeric recipe behind system.kinetics_u / kinetics_v
    std::optional<FunctionDescriptor> p;  // cases 15-19
    std::vector<std::string> warnings;
};

// Initial data and domain for the p(x) ODE of cases 15-19. The initial data
// sit at x_init; the solution covers [lo, hi].
struct PSettings {
    double p0 = 0.0;
    double dp0 = 0.0;
    double x_init = 0.0;
    double lo = 0.0;
    double hi = 2.5;
    double step = 1e-3;
};

std::vector<CaseInfo> list_cases();
const CaseInfo& info(int id);

// Functions: "d1" (of u), "d2" (of v), "f", "g" (of w). Throws
// ValidationError naming the violated restriction or the missing function.
// Cases 15-19 need p_settings.
Instance instantiate(int id, const std::map<std::string, double>& params,
                     const std::map<std::string, FunctionDescriptor>& functions,
                     std::optional<PSettings> p_settings = std::nullopt);

// Just the operator of a case (cases 15-19 need p).
SymmetryOperator make_operator(int id, const std::map<std::string, double>& params,
                               const std::optional<FunctionDescriptor>& p = std::nullopt);

// RK4 solution of p'' = p^2 + a p + b as a grid function with exact node
// values of p, p' and p''. Throws RuntimeFailure on |p| > 1e8, naming x.
FunctionDescriptor solve_p(double a, double b, const PSettings& settings);

// Coefficients (a, b) of the p(x) ODE for cases 15-19.
std::pair<double, double> p_ode(int id, const std::map<std::string, double>& params);

// A numeric slot of a kinetic term. Slots are coef, pu, pv, eu, ev, arg0..arg3.
struct Slot {
    bool v_equation = false;  // false: C1, true: C2
    std::size_t term = 0;
    int index = 0;  // 0..8 in the order above
    std::string describe() const;
};
double& slot_value(Kinetics& kinetics, const Slot& slot);

// Slots whose perturbation leaves the case's family. Excluded: the
// coefficient of an arbitrary-function term (absorbed by f or g), the
// coefficient of a free term, unused argument slots of a linear argument,
// and for an argument of one variable only, that variable's argument slot
// and prefactor power/exponent (absorbed by the arbitrary function).
std::vector<Slot> family_changing_slots(const Kinetics& kinetics);

// Rebuild the kinetics descriptors from a (possibly edited) recipe.
std::pair<FunctionDescriptor, FunctionDescriptor> build_kinetics(
    const Kinetics& kinetics, const FunctionDescriptor& d1, const std::map<std::string, FunctionDescriptor>& functions);

// A random admissible instance: parameter magnitudes in [0.5, 1.5] with
// random signs (lambda > 0), smooth non-power user functions, and p(x)
// initial data offset from the smaller equilibrium of its ODE.
struct Draw {
    std::map<std::string, double> params;
    std::map<std::string, std::string> functions;  // source text; see function_variable
    std::optional<PSettings> p_settings;
};
Draw random_draw(int id, std::uint64_t seed);

// "u" for d1, "v" for d2, "w" for f and g.
std::string function_variable(const std::string& name);

// Parses draw.functions and instantiates.
Instance instantiate(int id, const Draw& draw);

// Equivalence transformation t -> C1 t + C2, x -> C3 x + C4, u -> C5 u + C6,
// v -> C7 v + C8 applied to a transformed-form system and its operator.
struct Equivalence {
    std::array<double, 8> c{1, 0, 1, 0, 1, 0, 1, 0};
};
std::pair<RDSystem, SymmetryOperator> apply_equivalence(const RDSystem& sys, const SymmetryOperator& op,
                                                        const Equivalence& e);

// Discrete transformation u <-> v. Requires the operator's v_cross to vanish
// (checked on a probe grid); flips the manifold.
std::pair<RDSystem, SymmetryOperator> swap(const RDSystem& sys, const SymmetryOperator& op);

}  // namespace rdsym::catalog
