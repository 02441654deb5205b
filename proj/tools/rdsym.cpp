#include "rdsym/catalog.hpp"
#include "rdsym/detsys.hpp"
#include "rdsym/error.hpp"
#include "rdsym/linfam.hpp"
#include "rdsym/pdesolve.hpp"
#include "rdsym/reduction.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using nlohmann::json;
using namespace rdsym;

namespace {

constexpr int kOk = 0, kValidation = 1, kResidual = 2, kRuntime = 3;

bool g_json = false;

// Thrown once a report is printed and the run failed its check.
struct CheckFailed {};

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
    }
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ValidationError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
    return v;
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::size_t count_or(const json& j, const std::string& key, std::size_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const double v = number(j.at(key), where + "." + key);
    if (v < 1 || v != std::floor(v)) throw ValidationError(where + "." + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

std::string text(const json& j, const std::string& what) {
    if (!j.is_string()) throw ValidationError(what + " must be a string");
    return j.get<std::string>();
}

std::vector<double> numbers(const json& j, std::size_t size, const std::string& what) {
    if (!j.is_array() || (size && j.size() != size)) {
        throw ValidationError(what + " must be an array" + (size ? " of " + std::to_string(size) + " numbers" : ""));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

std::map<std::string, double> number_map(const json& j, const std::string& what) {
    if (!j.is_object()) throw ValidationError(what + " must be an object of numbers");
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = number(v, what + "." + k);
    return out;
}

detsys::Rect rect(const json& j, const std::string& where) {
    check_keys(j, {"t0", "t1", "x0", "x1", "nt", "nx"}, where);
    detsys::Rect r;
    r.t0 = number_or(j, "t0", r.t0, where);
    r.t1 = number_or(j, "t1", r.t1, where);
    r.x0 = number_or(j, "x0", r.x0, where);
    r.x1 = number_or(j, "x1", r.x1, where);
    r.nt = count_or(j, "nt", r.nt, where);
    r.nx = count_or(j, "nx", r.nx, where);
    if (!(r.t0 <= r.t1 && r.x0 <= r.x1)) throw ValidationError(where + " must have t0 <= t1 and x0 <= x1");
    return r;
}

std::uint64_t seed_from_env() {
    const char* s = std::getenv("RDSYM_SEED");
    if (!s || !*s) return 1;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != std::string(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("RDSYM_SEED must be a non-negative integer, got '") + s + "'");
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

void print_report(const detsys::ResidualReport& r, const std::string& title) {
    std::printf("%s: %s (tolerance %.1e, %zu samples)\n", title.c_str(), r.pass ? "PASS" : "FAIL", r.tolerance,
                r.samples);
    for (const auto& e : r.equations) std::printf("  %-14s max %.3e  l2 %.3e\n", e.label.c_str(), e.max_abs, e.l2);
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// catalog

void catalog_list() {
    const auto cases = catalog::list_cases();
    if (g_json) {
        json arr = json::array();
        for (const auto& c : cases) {
            arr.push_back({{"id", c.id},
                           {"parameters", c.parameters},
                           {"functions", c.functions},
                           {"restrictions", c.restrictions},
                           {"d1", c.d1},
                           {"d2", c.d2},
                           {"kinetics_u", c.kinetics_u},
                           {"kinetics_v", c.kinetics_v},
                           {"operator", c.operator_text},
                           {"ode", c.ode_defined ? json(c.ode_constraint) : json(nullptr)},
                           {"exclusion", c.excluded_d1}});
        }
        emit(arr);
        return;
    }
    for (const auto& c : cases) {
        std::printf("%2d  d1 = %s, d2 = %s\n", c.id, c.d1.c_str(), c.d2.c_str());
        std::printf("    C1 = %s\n    C2 = %s\n    Q  = %s\n", c.kinetics_u.c_str(), c.kinetics_v.c_str(),
                    c.operator_text.c_str());
        if (c.ode_defined) std::printf("    p: %s\n", c.ode_constraint.c_str());
        if (!c.restrictions.empty()) {
            std::string r;
            for (const auto& s : c.restrictions) r += (r.empty() ? "" : ", ") + s;
            std::printf("    restrictions: %s\n", r.c_str());
        }
    }
}

void catalog_verify(int only, std::size_t draws, std::size_t samples, double tol) {
    const std::uint64_t seed = seed_from_env();
    std::vector<int> ids;
    if (only) {
        catalog::info(only);
        ids.push_back(only);
    } else {
        for (int id = 1; id <= 21; ++id) ids.push_back(id);
    }
    bool all = true;
    json rows = json::array();
    if (!g_json) std::printf("case  draws  max residual  lie-equivalent  result\n");
    for (int id : ids) {
        double worst = 0.0;
        bool pass = true, lie = false;
        json reports = json::array();
        for (std::size_t d = 0; d < draws; ++d) {
            const std::uint64_t s = seed + d;
            const auto inst = catalog::instantiate(id, catalog::random_draw(id, s));
            if (d == 0 && !g_json) {
                for (const auto& w : inst.warnings) std::fprintf(stderr, "case %d: %s\n", id, w.c_str());
            }
            const auto pts = detsys::sample_box(samples, s);
            const auto rep = detsys::residuals_first_type(inst.system, inst.op, pts, tol);
            const auto eq = detsys::lie_equivalence_test(inst.system, inst.op, pts);
            worst = std::max(worst, rep.max_abs());
            pass = pass && rep.pass;
            lie = lie || eq.equivalent;
            json j = detsys::to_json(rep);
            j["seed"] = s;
            j["lie_equivalent"] = eq.equivalent;
            if (eq.witness) j["lie_witness"] = {{"point", detsys::to_json(*eq.witness)}, {"failed", eq.failed}, {"value", eq.value}};
            reports.push_back(j);
        }
        all = all && pass;
        if (g_json) {
            rows.push_back({{"case", id}, {"pass", pass}, {"max_abs", worst}, {"draws", reports}});
        } else {
            std::printf("%4d  %5zu  %12.3e  %14s  %s\n", id, draws, worst, lie ? "yes" : "no", pass ? "PASS" : "FAIL");
        }
    }
    if (g_json) emit({{"seed", seed}, {"tolerance", tol}, {"pass", all}, {"cases", rows}});
    if (!all) throw CheckFailed{};
}

// reduce

void reduce(int case_flag, const std::string& config_path, const std::string& output_flag) {
    const json cfg = read_config(config_path);
    check_keys(cfg, {"case", "params", "functions", "initial", "x_range", "step", "grid", "tolerance", "output"},
               "reduce config");
    int id = case_flag;
    if (!id && cfg.contains("case")) id = static_cast<int>(number(cfg["case"], "case"));
    if (id < 1 || id > 4) throw ValidationError("reduce supports cases 1-4, got " + std::to_string(id));

    const auto params = cfg.contains("params") ? number_map(cfg["params"], "params") : std::map<std::string, double>{};
    std::map<std::string, FunctionDescriptor> functions;
    if (cfg.contains("functions")) {
        check_keys(cfg["functions"], {"d1", "d2", "f", "g"}, "functions");
        for (const auto& [k, v] : cfg["functions"].items()) {
            functions[k] = FunctionDescriptor::parse(text(v, "functions." + k), {catalog::function_variable(k)});
        }
    }
    if (!functions.count("f") || !functions.count("g")) throw ValidationError("reduce needs functions f and g");
    const auto inst = catalog::instantiate(id, params, functions);
    for (const auto& w : inst.warnings) std::fprintf(stderr, "%s\n", w.c_str());

    std::vector<double> init{1, 0, 1, 0};
    if (cfg.contains("initial")) init = numbers(cfg["initial"], 4, "initial");
    std::vector<double> range{0, 1};
    if (cfg.contains("x_range")) range = numbers(cfg["x_range"], 2, "x_range");
    const double step = number_or(cfg, "step", 1e-3, "reduce config");
    const double tol = number_or(cfg, "tolerance", 1e-4, "reduce config");
    detsys::Rect grid;
    grid.x0 = range[0];
    grid.x1 = range[1];
    if (cfg.contains("grid")) grid = rect(cfg["grid"], "grid");

    const auto ansatz = reduction::build_ansatz(id, params);
    const auto rhs = reduction::reduced_rhs(id, functions.at("f"), functions.at("g"), params);
    const auto profile =
        reduction::integrate_reduced(rhs, init[0], init[1], init[2], init[3], {range[0], range[1]}, step, id, params);
    const auto report = reduction::lift_and_check(ansatz, profile, grid, inst.system, std::nullopt, tol);

    std::string output = output_flag;
    if (output.empty() && cfg.contains("output")) output = text(cfg["output"], "output");
    if (!output.empty()) write_file(output, profile.to_csv());

    if (g_json) {
        json j = detsys::to_json(report);
        j["case"] = id;
        j["profile"] = {{"x0", profile.x0}, {"x1", profile.x1()}, {"step", profile.step}, {"nodes", profile.size()}};
        if (!output.empty()) j["profile"]["csv"] = output;
        emit(j);
    } else {
        std::printf("case %d ansatz lifted from %zu profile nodes on [%g, %g]\n", id, profile.size(), profile.x0,
                    profile.x1());
        print_report(report, "residuals");
        if (!output.empty()) std::printf("profile written to %s\n", output.c_str());
    }
    if (!report.pass) throw CheckFailed{};
}

// linfam

struct LinfamConfig {
    linfam::Matrix m;
    std::array<double, 4> C{1, 0, 0, 0};
    std::vector<double> range{0, 1};
    std::size_t samples = 101;
    double alpha = 1.0;
    std::string d1 = "1 + u^2";
    detsys::Rect grid;
    double tol = detsys::kDefaultTolerance;
    std::string output;
};

LinfamConfig linfam_config(const std::string& path) {
    const json cfg = read_config(path);
    check_keys(cfg, {"lambda", "constants", "x_range", "samples", "alpha", "d1", "grid", "tolerance", "output"},
               "linfam config");
    if (!cfg.contains("lambda")) throw ValidationError("linfam config needs lambda = [l11, l12, l21, l22]");
    LinfamConfig c;
    const auto l = numbers(cfg["lambda"], 4, "lambda");
    c.m = {l[0], l[1], l[2], l[3]};
    if (cfg.contains("constants")) {
        const auto k = numbers(cfg["constants"], 4, "constants");
        std::copy(k.begin(), k.end(), c.C.begin());
    }
    if (cfg.contains("x_range")) c.range = numbers(cfg["x_range"], 2, "x_range");
    c.samples = count_or(cfg, "samples", c.samples, "linfam config");
    if (c.samples < 2) throw ValidationError("samples must be at least 2");
    c.alpha = number_or(cfg, "alpha", c.alpha, "linfam config");
    if (cfg.contains("d1")) c.d1 = text(cfg["d1"], "d1");
    if (cfg.contains("grid")) c.grid = rect(cfg["grid"], "grid");
    c.tol = number_or(cfg, "tolerance", c.tol, "linfam config");
    if (cfg.contains("output")) c.output = text(cfg["output"], "output");
    return c;
}

json branch_json(const linfam::LinearFamily& fam) {
    const auto& b = fam.branch();
    const auto& m = fam.matrix();
    return {{"case", fam.case_id()},
            {"trace", m.trace()},
            {"det", m.det()},
            {"discriminant", m.discriminant()},
            {"swapped", fam.swapped()},
            {"h", b.h},
            {"h_minus", b.h_minus},
            {"h_plus", b.h_plus},
            {"h1", b.h1},
            {"h2", b.h2},
            {"delta", b.delta}};
}

void linfam_classify(const std::string& path) {
    const auto c = linfam_config(path);
    const linfam::LinearFamily fam(c.m, c.C);
    const json j = branch_json(fam);
    if (g_json) {
        emit(j);
        return;
    }
    std::printf("case %d (trace %g, det %g, discriminant %g)%s\n", fam.case_id(), c.m.trace(), c.m.det(),
                c.m.discriminant(), fam.swapped() ? ", roles of phi and psi exchanged" : "");
    for (const char* k : {"h", "h_minus", "h_plus", "h1", "h2", "delta"}) {
        if (j[k].get<double>() != 0.0) std::printf("  %s = %.17g\n", k, j[k].get<double>());
    }
}

void linfam_profile(const std::string& path) {
    const auto c = linfam_config(path);
    const linfam::LinearFamily fam(c.m, c.C);
    std::ostringstream csv;
    csv.precision(17);
    csv << "x,phi,psi,dphi,dpsi,d2phi,d2psi\n";
    json rows = json::array();
    for (std::size_t i = 0; i < c.samples; ++i) {
        const double x = c.range[0] + (c.range[1] - c.range[0]) * static_cast<double>(i) / static_cast<double>(c.samples - 1);
        const auto p = fam.profile(x);
        csv << x << ',' << p.phi[0] << ',' << p.psi[0] << ',' << p.phi[1] << ',' << p.psi[1] << ',' << p.phi[2] << ','
            << p.psi[2] << '\n';
        rows.push_back({x, p.phi[0], p.psi[0]});
    }
    if (!c.output.empty()) write_file(c.output, csv.str());
    if (g_json) {
        json j = branch_json(fam);
        j["columns"] = {"x", "phi", "psi"};
        j["rows"] = rows;
        if (!c.output.empty()) j["csv"] = c.output;
        emit(j);
    } else if (c.output.empty()) {
        std::cout << csv.str();
    } else {
        std::printf("case %d profile (%zu rows) written to %s\n", fam.case_id(), c.samples, c.output.c_str());
    }
}

void linfam_lift(const std::string& path) {
    const auto c = linfam_config(path);
    const linfam::LinearFamily fam(c.m, c.C);
    const auto lifted = linfam::lift_family(fam, c.alpha);
    const auto d1 = FunctionDescriptor::parse(c.d1, {"u"});
    const detsys::Field field = [&](double t, double x) { return lifted(t, x); };
    const auto report = detsys::pde_residuals(lifted.system(d1), field, c.grid, c.tol);
    if (g_json) {
        json j = detsys::to_json(report);
        j["family"] = branch_json(fam);
        j["alpha"] = c.alpha;
        j["d1"] = d1.describe();
        emit(j);
    } else {
        std::printf("case %d family lifted with alpha = %g, d1 = %s\n", fam.case_id(), c.alpha, d1.describe().c_str());
        print_report(report, "residuals");
    }
    if (!report.pass) throw CheckFailed{};
}

// bvp fig1

FunctionDescriptor profile_at_zero(const linfam::PowerApplication& app, bool v, const char* name) {
    return FunctionDescriptor::composite(
        {"x"},
        [app, v](std::span<const double> a) {
            const auto s = linfam::power_solution(app, 0.0, a[0]);
            return v ? s.second : s.first;
        },
        name);
}

void bvp_fig1(std::size_t n, double T, std::size_t stamps, const std::string& out_dir) {
    linfam::PowerApplication app;
    app.k = 1;
    app.l = 1;
    app.star = {2, -1, -2, 1};
    app.C1 = 0.2;
    app.C2 = 0;
    app.C4 = 0.25;
    app.validate();
    if (stamps < 2) throw ValidationError("--stamps must be at least 2");

    const double length = M_PI / app.h();
    pdesolve::Settings s;
    s.T = T;
    for (std::size_t k = 0; k < stamps; ++k) s.stamps.push_back(T * static_cast<double>(k) / static_cast<double>(stamps - 1));
    const auto field = pdesolve::simulate(app.system(), profile_at_zero(app, false, "U(0,x)"),
                                          profile_at_zero(app, true, "V(0,x)"), pdesolve::Boundary::zero_flux(),
                                          {n, 0.0, length}, s);
    const auto exact_fn = [&](double t, double x) { return linfam::power_solution(app, t, x); };
    auto exact = field;
    for (std::size_t k = 0; k < exact.times.size(); ++k) {
        for (std::size_t i = 0; i < exact.x.size(); ++i) {
            std::tie(exact.U[k][i], exact.V[k][i]) = exact_fn(exact.times[k], exact.x[i]);
        }
    }
    const auto cmp = pdesolve::compare(field, exact_fn);
    const auto bvp = linfam::check_bvp(app, 1, T);
    const double tol = 2e-3;
    const double flux = std::max({std::fabs(bvp.flux_left_u), std::fabs(bvp.flux_left_v), std::fabs(bvp.flux_right_u),
                                  std::fabs(bvp.flux_right_v)});
    const bool pass = cmp.l_inf <= tol && flux < 1e-12 && bvp.positive && bvp.decay_monotone;

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "fig1_exact.csv", exact.to_csv());
    write_file(dir / "fig1_numeric.csv", field.to_csv());
    json report = cmp.to_json();
    report["tolerance"] = tol;
    report["pass"] = pass;
    report["interval"] = {0.0, length};
    report["parameters"] = {{"k", app.k},   {"l", app.l},   {"lambda_star", {2, -1, -2, 1}},
                            {"C1", app.C1}, {"C2", app.C2}, {"C4", app.C4},
                            {"h", app.h()}};
    report["bvp"] = {{"max_flux", flux},
                     {"min_U", bvp.min_u},
                     {"min_V", bvp.min_v},
                     {"positive", bvp.positive},
                     {"decay_monotone", bvp.decay_monotone}};
    report["solver"] = field.metadata();
    write_file(dir / "fig1_compare.json", report.dump(2) + "\n");

    if (g_json) {
        emit(report);
    } else {
        std::printf("porous Lotka-Volterra run on [0, pi/sqrt(6)] with n = %zu up to T = %g\n", n, T);
        std::printf("  L_inf error %.3e (tolerance %.1e), largest L2 %.3e\n", cmp.l_inf, tol, cmp.l2);
        std::printf("  end fluxes %.1e, min U %.4f, min V %.4f, sup-norm decreasing: %s\n", flux, bvp.min_u, bvp.min_v,
                    bvp.decay_monotone ? "yes" : "no");
        std::printf("  %s; wrote fig1_exact.csv, fig1_numeric.csv, fig1_compare.json to %s\n", pass ? "PASS" : "FAIL",
                    dir.string().c_str());
    }
    if (!pass) throw CheckFailed{};
}

// simulate

void simulate(const std::string& path, const std::string& output_flag) {
    const json cfg = read_config(path);
    check_keys(cfg, {"system", "initial", "boundary", "grid", "T", "sigma", "stamps", "exact", "output"},
               "simulate config");
    if (!cfg.contains("system") || !cfg.contains("initial")) throw ValidationError("simulate config needs system and initial");
    const auto& js = cfg["system"];
    check_keys(js, {"D1", "D2", "F", "G"}, "system");
    for (const char* k : {"D1", "D2", "F", "G"}) {
        if (!js.contains(k)) throw ValidationError(std::string("system needs ") + k);
    }
    RDSystem sys;
    sys.form = Form::divergence;
    sys.diffusivity_u = FunctionDescriptor::parse(text(js["D1"], "system.D1"), {"U"});
    sys.diffusivity_v = FunctionDescriptor::parse(text(js["D2"], "system.D2"), {"V"});
    sys.kinetics_u = FunctionDescriptor::parse(text(js["F"], "system.F"), {"U", "V"});
    sys.kinetics_v = FunctionDescriptor::parse(text(js["G"], "system.G"), {"U", "V"});

    const auto& ji = cfg["initial"];
    check_keys(ji, {"U", "V"}, "initial");
    if (!ji.contains("U") || !ji.contains("V")) throw ValidationError("initial needs U and V");
    const auto U0 = FunctionDescriptor::parse(text(ji["U"], "initial.U"), {"x"});
    const auto V0 = FunctionDescriptor::parse(text(ji["V"], "initial.V"), {"x"});

    auto bc = pdesolve::Boundary::zero_flux();
    if (cfg.contains("boundary")) {
        const auto& jb = cfg["boundary"];
        check_keys(jb, {"kind", "left", "right"}, "boundary");
        const std::string kind = jb.contains("kind") ? text(jb["kind"], "boundary.kind") : "zero-flux";
        if (kind == "dirichlet") {
            if (!jb.contains("left") || !jb.contains("right")) throw ValidationError("dirichlet boundary needs left and right [U, V]");
            const auto l = numbers(jb["left"], 2, "boundary.left"), r = numbers(jb["right"], 2, "boundary.right");
            bc = pdesolve::Boundary::dirichlet(l[0], l[1], r[0], r[1]);
        } else if (kind != "zero-flux") {
            throw ValidationError("boundary.kind must be zero-flux or dirichlet");
        }
    }
    pdesolve::Grid grid;
    if (cfg.contains("grid")) {
        check_keys(cfg["grid"], {"n", "x0", "x1"}, "grid");
        grid.n = count_or(cfg["grid"], "n", grid.n, "grid");
        grid.x0 = number_or(cfg["grid"], "x0", grid.x0, "grid");
        grid.x1 = number_or(cfg["grid"], "x1", grid.x1, "grid");
    }
    pdesolve::Settings s;
    s.T = number_or(cfg, "T", s.T, "simulate config");
    s.sigma = number_or(cfg, "sigma", s.sigma, "simulate config");
    if (cfg.contains("stamps")) s.stamps = numbers(cfg["stamps"], 0, "stamps");

    const auto field = pdesolve::simulate(sys, U0, V0, bc, grid, s);
    std::string output = output_flag;
    if (output.empty() && cfg.contains("output")) output = text(cfg["output"], "output");
    if (!output.empty()) write_file(output, field.to_csv());

    json report = field.metadata();
    if (cfg.contains("exact")) {
        const auto& je = cfg["exact"];
        check_keys(je, {"U", "V"}, "exact");
        const auto eu = FunctionDescriptor::parse(text(je.at("U"), "exact.U"), {"t", "x"});
        const auto ev = FunctionDescriptor::parse(text(je.at("V"), "exact.V"), {"t", "x"});
        report["comparison"] = pdesolve::compare(field, [&](double t, double x) { return std::pair{eu(t, x), ev(t, x)}; }).to_json();
    }
    if (g_json) {
        if (!output.empty()) report["csv"] = output;
        emit(report);
    } else {
        std::printf("%zu steps (dt %.3e..%.3e), %zu stamps\n", field.steps, field.dt_min, field.dt_max, field.times.size());
        if (report.contains("comparison")) {
            std::printf("  L_inf error %.3e, largest L2 %.3e\n", report["comparison"]["l_inf"].get<double>(),
                        report["comparison"]["l2"].get<double>());
        }
        if (output.empty()) {
            std::cout << field.to_csv();
        } else {
            std::printf("field written to %s\n", output.c_str());
        }
    }
}

int fail(int code, const std::string& kind, const std::string& message) {
    if (g_json) {
        std::cout << json{{"error", kind}, {"message", message}}.dump(2) << '\n';
    } else {
        std::fprintf(stderr, "%s: %s\n", kind.c_str(), message.c_str());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reaction-diffusion systems with conditional symmetries: catalog, reductions, exact solutions"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--json", g_json, "Machine-readable JSON report on stdout");

    auto* cat = app.add_subcommand("catalog", "Catalog of systems with first-type conditional symmetries");
    cat->require_subcommand(1);
    cat->add_subcommand("list", "List the 21 cases");
    auto* verify = cat->add_subcommand("verify", "Certify determining equations on random draws");
    int verify_case = 0;
    bool verify_all = false;
    std::size_t draws = 3, samples = 50;
    double tol = detsys::kDefaultTolerance;
    auto* case_opt = verify->add_option("--case", verify_case, "Case id 1..21")->check(CLI::Range(1, 21));
    verify->add_flag("--all", verify_all, "All 21 cases")->excludes(case_opt);
    verify->add_option("--draws", draws, "Parameter draws per case")->check(CLI::PositiveNumber);
    verify->add_option("--samples", samples, "Sample points per draw")->check(CLI::PositiveNumber);
    verify->add_option("--tol", tol, "Residual tolerance");

    auto* red = app.add_subcommand("reduce", "Reduce a catalog case to ODEs, integrate and lift back");
    int reduce_case = 0;
    std::string reduce_config, reduce_output;
    red->add_option("--case", reduce_case, "Case id 1..4")->check(CLI::Range(1, 4));
    red->add_option("--config", reduce_config, "JSON config")->required();
    red->add_option("--output", reduce_output, "Profile CSV path");

    auto* lin = app.add_subcommand("linfam", "Closed-form families of the linear reduced system");
    lin->require_subcommand(1);
    std::string linfam_path;
    auto* lin_classify = lin->add_subcommand("classify", "Branch and constants");
    auto* lin_profile = lin->add_subcommand("profile", "Tabulate phi, psi");
    auto* lin_lift = lin->add_subcommand("lift", "Residuals of the lifted family");
    for (auto* sub : {lin_classify, lin_profile, lin_lift}) sub->add_option("--config", linfam_path, "JSON config")->required();

    auto* bvp = app.add_subcommand("bvp", "Boundary-value problems");
    bvp->require_subcommand(1);
    auto* fig1 = bvp->add_subcommand("fig1", "Porous Lotka-Volterra zero-flux problem against the solver");
    std::size_t fig_n = 201, fig_stamps = 11;
    double fig_T = 1.0;
    std::string out_dir = ".";
    fig1->add_option("--n", fig_n, "Grid points")->check(CLI::Range(5, 100000));
    fig1->add_option("--T", fig_T, "Final time")->check(CLI::PositiveNumber);
    fig1->add_option("--stamps", fig_stamps, "Output times including 0 and T");
    fig1->add_option("--out-dir", out_dir, "Directory for CSV and JSON output");

    auto* sim = app.add_subcommand("simulate", "Finite-difference solver");
    std::string sim_config, sim_output;
    sim->add_option("--config", sim_config, "JSON config")->required();
    sim->add_option("--output", sim_output, "Field CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (cat->got_subcommand("list")) {
            catalog_list();
        } else if (*verify) {
            if (!verify_all && !verify_case) throw ValidationError("catalog verify needs --case N or --all");
            catalog_verify(verify_all ? 0 : verify_case, draws, samples, tol);
        } else if (*red) {
            reduce(reduce_case, reduce_config, reduce_output);
        } else if (*lin_classify) {
            linfam_classify(linfam_path);
        } else if (*lin_profile) {
            linfam_profile(linfam_path);
        } else if (*lin_lift) {
            linfam_lift(linfam_path);
        } else if (*fig1) {
            bvp_fig1(fig_n, fig_T, fig_stamps, out_dir);
        } else if (*sim) {
            simulate(sim_config, sim_output);
        }
    } catch (const CheckFailed&) {
        return kResidual;
    } catch (const ValidationError& e) {
        return fail(kValidation, "validation error", e.what());
    } catch (const DomainError& e) {
        return fail(kRuntime, "domain error", e.what());
    } catch (const RuntimeFailure& e) {
        return fail(kRuntime, "runtime failure", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kValidation, "validation error", e.what());
    }
    return kOk;
}
