#pragma once

#include "rdsym/function.hpp"

#include <optional>

namespace rdsym {

enum class Form {
    divergence,   // U_t = (D1(U) U_x)_x + F(U,V),  V_t = (D2(V) V_x)_x + G(U,V)
    transformed,  // u_xx = d1(u) u_t + C1(u,v),    v_xx = d2(v) v_t + C2(u,v)
};

enum class Convention {
    raw,               // u = integral of D from the reference point
    power_normalized,  // for D = c U^k: u = U^(k+1), i.e. scale (k+1)/c
};

// Parameters of the substitution u = scale * integral_{reference}^{U} D.
struct KirchhoffFrame {
    Convention convention = Convention::raw;
    double scale_u = 1.0;
    double scale_v = 1.0;
    double reference_u = 0.0;
    double reference_v = 0.0;
};

struct RDSystem {
    Form form = Form::transformed;
    FunctionDescriptor diffusivity_u;  // D1(U) or d1(u)
    FunctionDescriptor diffusivity_v;  // D2(V) or d2(v)
    FunctionDescriptor kinetics_u;     // F(U,V) or C1(u,v)
    FunctionDescriptor kinetics_v;     // G(U,V) or C2(u,v)
    // Set when the system came out of transform_system; reused by the
    // reverse transform so a round trip lands on the same variables.
    std::optional<KirchhoffFrame> frame;
};

// Checks arities (1,1,2,2); throws ValidationError otherwise.
void validate_shape(const RDSystem& sys);

}  // namespace rdsym
