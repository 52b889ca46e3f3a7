#pragma once

#include <optional>
#include <string>

#include "lolight/normal_forms.hpp"
#include "lolight/transforms.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// Suspension straightening of a positive ceiling function under a Diophantine
// rotation: the cohomological shift replaces the ceiling by its mean.
// ---------------------------------------------------------------------------
struct StraightenResult {
    double return_time; // mean of the ceiling
    Fn1 shift;          // psi with ceiling(z) + psi(R_theta z) - psi(z) = mean
};
StraightenResult straighten_slope(const Fn1& ceiling, const Theta& theta);

// A normal-form reduction result: the form plus the recorded coordinate
// change, with pullback_spec(input, change, theta_out) equal to the output.
template <class NF>
struct Reduction {
    NF form;
    AffMap change;
    double composition_tail = 0; // z-projection tail picked up, 0 when exact
};

// Reduce a constant-L^2, Diophantine-slope spec to the unique normal form.
Reduction<NormalFormDio> reduce_diophantine(const MetricSpec& spec);

// Reduce a rational-slope spec with closed X-perp leaves (L^2 = L^2(z) in the
// theta = 0 chart) to the closed-leaf normal form.
Reduction<NormalFormClosed> reduce_closed(const MetricSpec& spec);

// Residual group actions on normal forms.
NormalFormDio act_gl2(const NormalFormDio& nf, long a, long b, long c, long d);
NormalFormDio act_signs_dio(const NormalFormDio& nf, int e1, int e2, int e3);
NormalFormClosed act_Z(const NormalFormClosed& nf, int ell);
NormalFormClosed act_signs_closed(const NormalFormClosed& nf, int e1, int e2);
NormalFormDio act_translation(const NormalFormDio& nf, double y0, double z0);
NormalFormClosed act_translation(const NormalFormClosed& nf, double y0, double z0);

// ---------------------------------------------------------------------------
// Isometry decision by bounded search over the residual group.
// ---------------------------------------------------------------------------
struct IsometrySearchBounds {
    int ell_max = 8;  // Z-action range for the closed family
    int m_max = 6;    // GL2 entry bound for the Diophantine family
    double tol = 1e-7;
};

struct IsometryDecision {
    enum class Kind { isometric, not_isometric, undecided };
    Kind kind = Kind::undecided;
    std::string witness; // human-readable witness / obstruction
};

IsometryDecision are_isometric(const NormalFormDio& a, const NormalFormDio& b,
                               const IsometrySearchBounds& bounds = {});
IsometryDecision are_isometric(const NormalFormClosed& a, const NormalFormClosed& b,
                               const IsometrySearchBounds& bounds = {});

} // namespace lolight
