#pragma once

#include <vector>

#include "lolight/normalform.hpp"
#include "lolight/transforms.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// The flat deformation paths: g_1 is the input and g_0 is flat, with the
// case generators staying affine (non-isometric) along the whole path.
//
// Generic path (frame interpolation, covers sigma, phi0, the flows and psi):
//   L^2_t = (1 - t) + t L^2,  mu_t = t mu,  k and Lambda fixed.
//
// Case (iv) path (for chi-type generators, requires the Lcal certificate):
//   the conjugated family F^* h_t of the non-equicontinuous construction,
//   exposed as a pointwise metric field.
// ---------------------------------------------------------------------------

MetricSpec deform_path(const NormalFormClosed& nf, double t);
MetricSpec deform_path_dio(const NormalFormDio& nf, double t);

struct PathDefect {
    double t;
    AffineDefect defect;
};

// Verify an affine map along the generic path at the given samples; throws
// VerificationFailed naming the offending t when the defect residual exceeds
// the tolerance.
std::vector<PathDefect> verify_along_path(const NormalFormClosed& nf, const AffMap& map,
                                          const std::vector<double>& t_samples,
                                          double tol = 1e-8, int grid_n = 16);
std::vector<PathDefect> verify_along_path_dio(const NormalFormDio& nf, const AffMap& map,
                                              const std::vector<double>& t_samples,
                                              double tol = 1e-8, int grid_n = 16);

// ---------------------------------------------------------------------------
// Case (iv): the h_t family for chi-type generators, which the generic path
// cannot carry (it moves Lcal/Lambda off its rational value). Conjugating by
// the straightening map (x, y, z) -> (x, y + m(w), H^{-1}(w)) turns chi into
// a z-affine morphism; in that chart h_{1,3}/h_{2,2} is the constant
// Lambda/Lcal and h_{2,3} is quadratic in h_{2,2}. The family interpolates
// h_{2,2} to 1 and h_{3,3} to 0 keeping those relations, so chi stays affine
// with the same defect for every t; g_t pulls the family back to the source
// chart. t = 1 is the input metric, t = 0 is flat.
// ---------------------------------------------------------------------------
struct CaseIvFamily {
    MetricField metric_at(double t) const; // coordinate-basis field of g_t
    AffineDefect defect_at(double t, int grid_n = 12) const;
    // the flat endpoint as an ordinary constant-coefficient spec, isometric
    // to g_0 (use it for exact curvature checks)
    MetricSpec flat_endpoint_spec() const;

    AffMap chi;
    int ell = 0, A = 0, B = 0;
    double Lambda = 1, k = 0, mu0 = 0;
    double rho = 1;            // h13 / h22 = Lambda / Lcal
    double q23 = 0, l23 = 0;   // h23 = q23 h22^2 + l23 h22
    double C0 = 0;             // defect constant carried by the family
    Fn1 L2, Hper, eta;
};

// Build the family for the chi generator of a case-(6)/(7) form (n = 0).
// Requires the Lcal certificate, exactly like make_generator("chi").
CaseIvFamily case_iv_family(const NormalFormClosed& nf);

} // namespace lolight
