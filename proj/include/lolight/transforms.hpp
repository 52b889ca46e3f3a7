#pragma once

#include <string>
#include <vector>

#include "lolight/model.hpp"
#include "lolight/normal_forms.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// Structured x-shear: the x-component of every map in this artifact is
//   x' = s1 x + c + A y + B z + qyy y^2 + qyz y z + qzz z^2
//        + y py(z) + z p1(z) + f2(y,z)
// with py, p1 1-periodic and f2 biperiodic. Exact values and derivatives.
// ---------------------------------------------------------------------------
struct XShear {
    double c = 0, Ay = 0, Bz = 0;
    double qyy = 0, qyz = 0, qzz = 0;
    Fn1 py, p1;
    Fn2 f2;

    double eval(double y, double z) const;
    double ddy(double y, double z) const;
    double ddz(double y, double z) const;

    XShear operator+(const XShear& o) const;
    XShear operator-(const XShear& o) const;
    XShear operator*(double s) const;
    bool is_zero(double tol = 1e-12) const;
    double max_abs() const;
};

// ---------------------------------------------------------------------------
// The affine-map class closed under the compositions this artifact performs:
//   x' = s1 x + xs(y, z)
//   y' = m11 y + m12 z + sy(z) + ty
//   z' = m21 y + m22 z + tz
// s1 = +-1; m integer. Maps are stored structurally so differentials,
// compositions and lattice conjugation are exact. Compositions that would
// leave the class throw UnrepresentableComposition.
// ---------------------------------------------------------------------------
struct AffMap {
    double s1 = 1.0;
    XShear xs;
    long m11 = 1, m12 = 0, m21 = 0, m22 = 1;
    Fn1 sy;
    double ty = 0, tz = 0;

    Vec3 operator()(const Vec3& p) const;
    Mat3 differential(const Vec3& p) const;
    bool is_identity(double tol = 1e-12) const;

    static AffMap identity() { return AffMap{}; }
    static AffMap translation(double tx, double tyy, double tzz);
    static AffMap x_shear(const Fn2& f);              // x += f(y,z)
    static AffMap x_shear_int(long A, long B);        // x += A y + B z
    static AffMap sigma();                            // (x+z, y, z)
    static AffMap flow_Y(double s, int n);            // time s of d_y + n z d_x
    static AffMap flow_Z(double t);                   // (x, y, z+t)
    static AffMap flow_frame(double s, int n, double theta); // flow of Y + theta d_z
    static AffMap phi0(int n, double theta);          // (x+z, y, z + theta/n)
    static AffMap signs(int e1, int e2, int e3);
    static AffMap gl2_normalizer(long a, long b, long c, long d, int n);

    // outer(inner(p))
    static AffMap compose(const AffMap& outer, const AffMap& inner, int band = 48);
};

AffMap pow(const AffMap& m, int k); // k >= 0 repeated composition

// Exact normalizer membership: map . gamma . map^{-1} in the lattice for
// every generator gamma, decided on the structured representation.
bool normalizes_lattice(const AffMap& map, const Lattice& lattice, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Pullbacks and the affine defect.
// ---------------------------------------------------------------------------

// Pointwise pullback (phi^* g)_p = J^T g_{phi(p)} J on a (y,z) grid at x = 0.
std::vector<Mat3> pullback(const MetricField& field, const AffMap& map, int grid_n);
std::vector<Mat3> pullback(const MetricSpec& spec, const AffMap& map, int grid_n);

struct AffineDefect {
    double C = 0;        // fitted constant in phi^*g = g + C Xb (x) Xb
    double residual = 0; // sup |phi^*g - g - C Xb (x) Xb| over the grid
    double C_spread = 0; // max pointwise deviation of the per-point fit
    double lambda = 1;   // phi_* X = lambda X (+-1 here)
};

// Least-squares fit of phi^*g - g against Xb (x) Xb with Xb read off the
// metric itself; the g(d_z,d_z) channel anchors the per-point constant.
AffineDefect affine_defect_field(const MetricField& field, const AffMap& map, int grid_n);
AffineDefect affine_defect(const MetricSpec& spec, const AffMap& map, int grid_n = 24);

// E with phi^*g = g(E ., .); N = E - Id. N^2 = 0 and N = C g(., X) X for
// genuine affine maps.
std::pair<Mat3, Mat3> decompose_E(const MetricSpec& spec, const AffMap& map, const Vec3& p);

// sup |r(map(p)) - r(p)| over the grid.
double check_r_invariance(const MetricSpec& spec, const AffMap& map, int grid_n = 24);

// ---------------------------------------------------------------------------
// Symbolic pullback: entries of map^* g in the frame B_{n, theta_new},
// computed exactly on the trig-polynomial class (composition with a periodic
// y-shift reprojects in z). Throws VerificationFailed when the result is not
// of the invariant frame form (entry polynomial parts must cancel).
// ---------------------------------------------------------------------------
MetricSpec pullback_spec(const MetricSpec& spec, const AffMap& map, const Theta& theta_new,
                         double tol = 1e-9, int band = 48, double* tail = nullptr);

// ---------------------------------------------------------------------------
// Generators of Table 2. The kind strings are the CLI vocabulary.
//   sigma | chi | chi_prime | psi | phi0 | flowY | flowZ | phi_lAB
// ---------------------------------------------------------------------------
struct GeneratorParams {
    double s = 1.0;          // flowY / flowZ / flow_frame time
    int ell = 0, A = 0, B = 0; // phi_lAB
};

AffMap make_generator(const std::string& kind, const GeneratorParams& params,
                      const NormalFormClosed& nf);
// Dio-family generators (phi0, flow of Y + theta d_z, sigma).
AffMap make_generator_dio(const std::string& kind, const GeneratorParams& params,
                          const NormalFormDio& nf);

// The affine morphism phi_{l,A,B} fixing 0 (y -> y - l H(z), x-shear with the
// quadratic n-terms and the eta correction making the fiber mean constant).
AffMap phi_lAB(const NormalFormClosed& nf, int ell, int A, int B);

// eta of the condition making S(z) constant, mean-zero gauge.
Fn1 eta_of(const NormalFormClosed& nf, int ell);

} // namespace lolight
