#pragma once

#include "rdsym/function.hpp"
#include "rdsym/rdsystem.hpp"

#include <optional>
#include <utility>

namespace rdsym::kirchhoff {

// u = scale * integral_{reference}^{U} D(s) ds
struct Map {
    FunctionDescriptor diffusivity;
    double scale = 1.0;
    double reference = 0.0;
    bool normalized_power = false;  // closed-form shortcut u = U^(k+1)
};

// Power-law diffusivities default to the normalized convention with
// reference 0; everything else integrates from `reference` with scale 1.
Map make_map(const FunctionDescriptor& diffusivity, Convention convention = Convention::power_normalized,
             std::optional<double> reference = std::nullopt);

// Throws DomainError where D is non-positive on the path, RuntimeFailure if
// quadrature does not converge.
double forward(const Map& map, double U);

// Inverse of forward. Without a bracket the search expands outward from the
// reference point. Throws DomainError when u is outside the range.
double inverse(const Map& map, double u, std::optional<std::pair<double, double>> bracket = std::nullopt);

double forward(const FunctionDescriptor& diffusivity, double U,
               Convention convention = Convention::power_normalized, std::optional<double> reference = std::nullopt);
double inverse(const FunctionDescriptor& diffusivity, double u,
               Convention convention = Convention::power_normalized, std::optional<double> reference = std::nullopt);

// d = u^gamma  <->  D = U^k  with  k = -gamma/(gamma+1),  gamma = -k/(k+1).
double exponent_from_gamma(double gamma);
double gamma_from_exponent(double k);

// Divergence form <-> transformed form:
//   d(u) = 1/D(U),  C(u,v) = -scale * F(U,V)
// The output carries the frame so transforming back restores the original
// variables.
RDSystem transform_system(const RDSystem& sys, Convention convention = Convention::power_normalized);

}  // namespace rdsym::kirchhoff
