#pragma once

#include "rdsym/function.hpp"
#include "rdsym/rdsystem.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rdsym::pdesolve {

struct Boundary {
    enum class Kind { zero_flux, dirichlet };
    Kind kind = Kind::zero_flux;
    // Dirichlet values (U, V) at the left and right ends.
    double left_u = 0.0, left_v = 0.0, right_u = 0.0, right_v = 0.0;

    static Boundary zero_flux() { return {}; }
    static Boundary dirichlet(double left_u, double left_v, double right_u, double right_v) {
        return {Kind::dirichlet, left_u, left_v, right_u, right_v};
    }
};

struct Grid {
    std::size_t n = 201;
    double x0 = 0.0;
    double x1 = 1.0;
    double dx() const { return (x1 - x0) / static_cast<double>(n - 1); }
    std::vector<double> nodes() const;
};

struct Settings {
    double T = 1.0;
    double sigma = 0.4;           // dt = sigma dx^2 / (2 max D)
    std::vector<double> stamps;   // output times in [0, T]; default {0, T}
    double blowup = 1e8;
    double degeneracy = 1e-12;    // abort when some D falls below this
};

struct GridField {
    std::vector<double> x;
    std::vector<double> times;
    std::vector<std::vector<double>> U;  // U[stamp][node]
    std::vector<std::vector<double>> V;
    RDSystem system;
    Boundary boundary;
    std::size_t steps = 0;
    double dt_min = 0.0, dt_max = 0.0;

    std::string to_csv() const;  // t,x,U,V long format
    nlohmann::json metadata() const;
};

// Explicit Euler method of lines for the divergence-form system.
GridField simulate(const RDSystem& sys, const FunctionDescriptor& U0, const FunctionDescriptor& V0,
                   const Boundary& bc, const Grid& grid, const Settings& settings);

using Exact = std::function<std::pair<double, double>(double, double)>;

struct Comparison {
    struct Stamp {
        double t = 0.0;
        double l_inf = 0.0;
        double l2 = 0.0;
    };
    double l_inf = 0.0;  // over all stamps
    double l2 = 0.0;     // largest per-stamp l2
    std::vector<Stamp> stamps;
    nlohmann::json to_json() const;
};

// l_inf: max over nodes and components; l2: sqrt of the trapezoid-weighted
// sum of squared errors of both components.
Comparison compare(const GridField& field, const Exact& exact);
Comparison compare(const GridField& a, const GridField& b);

// Trapezoid integral of U over the grid at a stamp.
double mass(const GridField& field, std::size_t stamp, bool v_component = false);

}  // namespace rdsym::pdesolve
