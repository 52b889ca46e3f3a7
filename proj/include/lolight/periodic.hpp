#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lolight/errors.hpp"
#include "lolight/numerics.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// Truncated real Fourier series on the circle:
//   f(z) = a[0] + sum_{j=1..max_freq} a[j] cos(2 pi j z) + b[j] sin(2 pi j z)
// b[0] is identically zero. These are the canonical function objects of the
// whole library; all exact identities are stated on this class.
// ---------------------------------------------------------------------------
struct Fn1 {
    int max_freq = 0;
    std::vector<double> a, b; // size max_freq + 1, b[0] == 0

    Fn1() : a(1, 0.0), b(1, 0.0) {}
    explicit Fn1(int mf) : max_freq(mf), a(mf + 1, 0.0), b(mf + 1, 0.0) {}
    static Fn1 constant(double c) {
        Fn1 f;
        f.a[0] = c;
        return f;
    }
    static Fn1 harmonic(int j, double cos_coeff, double sin_coeff);

    double operator()(double z) const;
    double mean() const { return a[0]; }
    bool is_constant(double tol = 0.0) const;

    Fn1 derivative() const;            // exact term-wise d/dz
    Fn1 antiderivative_mean_zero() const; // requires mean()==0 (caller ensures)

    Fn1 operator+(const Fn1& o) const;
    Fn1 operator-(const Fn1& o) const;
    Fn1 operator*(double s) const;
    Fn1 operator*(const Fn1& o) const; // exact product (degrees add)
    Fn1 shifted(double dz) const;      // f(z + dz), exact mode-wise
    Fn1 reflected() const;             // f(-z)
    Fn1 rescaled_argument(int m) const; // f(m z), |m| >= 1 integer

    double max_abs_coeff() const;
    Fn1 trimmed(double tol = 0.0) const; // drop trailing zero modes
};

// Projection of an arbitrary smooth 1-periodic sampler onto max_freq modes.
// Trapezoid quadrature with heavy oversampling: spectrally accurate for the
// analytic compositions (1/L^2, sqrt, exp, log) that arise here.
Fn1 project1(const std::function<double(double)>& f, int max_freq, int oversample = 8);

Fn1 reciprocal(const Fn1& f, int max_freq, int oversample = 8);
Fn1 sqrt_fn(const Fn1& f, int max_freq, int oversample = 8);

// ---------------------------------------------------------------------------
// Real trig polynomial on the 2-torus with arguments (y, z):
//   f(y,z) = sum over canonical modes (j,k) of
//            a cos(2 pi (j y + k z)) + b sin(2 pi (j y + k z))
// Canonical mode set: j = 0 with k = 0..max_z, then j = 1..max_y with
// k = -max_z..max_z (j outer ascending, k inner ascending). b at (0,0) is 0.
// ---------------------------------------------------------------------------
struct Fn2 {
    int max_y = 0, max_z = 0;
    std::vector<double> a, b;

    Fn2() : a(1, 0.0), b(1, 0.0) {}
    Fn2(int my, int mz);
    static Fn2 constant(double c) {
        Fn2 f;
        f.a[0] = c;
        return f;
    }
    static Fn2 harmonic(int j, int k, double cos_coeff, double sin_coeff);
    static Fn2 from_1d_z(const Fn1& f); // f(z) viewed on the torus
    static Fn2 from_1d_y(const Fn1& f);

    std::size_t mode_count() const { return a.size(); }
    // Index of canonical mode (j,k); j,k must be canonical.
    std::size_t index(int j, int k) const;
    bool in_range(int j, int k) const;

    // Coefficient accessors for arbitrary (j,k) != (0,0): the sign flip for
    // non-canonical (j,k) -> (-j,-k) is handled here.
    double coeff_a(int j, int k) const;
    double coeff_b(int j, int k) const;
    void add_mode(int j, int k, double ca, double cb);

    double operator()(double y, double z) const;
    double mean() const { return a[0]; }
    bool is_constant(double tol = 0.0) const;
    bool depends_on_y(double tol = 0.0) const;
    bool depends_on_z(double tol = 0.0) const;

    Fn2 d_dy() const;
    Fn2 d_dz() const;

    Fn2 operator+(const Fn2& o) const;
    Fn2 operator-(const Fn2& o) const;
    Fn2 operator*(double s) const;
    Fn2 operator*(const Fn2& o) const;
    Fn2 operator+(double c) const;

    Fn2 shifted(double dy, double dz) const; // f(y + dy, z + dz)
    Fn2 reflected(bool flip_y, bool flip_z) const;
    // f((a y + b z), (c y + d z)) for an integer matrix; exact mode remap.
    Fn2 linear_substitution(long a, long b, long c, long d) const;

    double max_abs_coeff() const;
    double sup_norm_estimate() const; // sum of |coeff|, cheap upper bound
    Fn2 trimmed(double tol = 0.0) const;
};

Fn2 project2(const std::function<double(double, double)>& f, int max_y, int max_z,
             int oversample = 8);
Fn2 reciprocal(const Fn2& f, int max_y, int max_z, int oversample = 8);
Fn2 sqrt_fn(const Fn2& f, int max_y, int max_z, int oversample = 8);
Fn2 log_fn(const Fn2& f, int max_y, int max_z, int oversample = 8);
Fn2 exp_fn(const Fn2& f, int max_y, int max_z, int oversample = 8);

double mean(const Fn1& f);
double mean(const Fn2& f);
// Average over one variable; axis 'y' gives a function of z (keeps j = 0
// modes), axis 'z' gives a function of y.
Fn1 fiber_mean(const Fn2& f, char axis);

// f(y + s(z), z) where s is 1-periodic. Exact in y; the z-dependence is
// reprojected onto max_z_out modes (spectral accuracy for smooth s). Returns
// the composed function; *tail_estimate (optional) receives the magnitude of
// the largest discarded z-coefficient, ~0 when s is constant.
Fn2 compose_y_shift(const Fn2& f, const Fn1& s, int max_z_out,
                    double* tail_estimate = nullptr);

// ---------------------------------------------------------------------------
// Slope of the projected lightlike foliation. Rational slopes are exact;
// quadratic irrationals (a + b sqrt(d))/c are automatically Diophantine;
// raw floats must be declared Diophantine and carry a minimum divisor bound.
// ---------------------------------------------------------------------------
struct Theta {
    enum class Kind { rational, quadratic, declared };
    Kind kind = Kind::rational;

    Rational rat;                       // rational
    std::int64_t qa = 0, qb = 0, qc = 1, qd = 0; // (qa + qb sqrt(qd)) / qc
    double declared_value = 0.0;
    bool declared_diophantine = false;
    double eps_div = 1e-8;

    static Theta rational(std::int64_t p, std::int64_t q);
    static Theta quadratic(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
    static Theta declared(double value, bool diophantine, double eps_div = 1e-8);
    static Theta golden(); // (sqrt(5) - 1) / 2, the usual test slope

    double value() const;
    bool is_rational() const { return kind == Kind::rational; }
    bool is_zero() const { return kind == Kind::rational && rat.p == 0; }
    // Accepted by the small-divisor solvers?
    bool is_diophantine_certified() const;

    // theta' = (c + d theta) / (a + b theta), exact on the representation.
    Theta moebius(long a, long b, long c, long d) const;
    Theta negated() const;
};

// e^{2 pi i j theta} - 1, the rotation small divisor.
std::complex<double> rotation_divisor(const Theta& theta, int j);
// Is frequency j exactly resonant (j theta integral)?
bool rotation_resonant(const Theta& theta, int j);
// j + k theta, the directional small divisor; resonance test alongside.
double directional_divisor(const Theta& theta, int j, int k);
bool directional_resonant(const Theta& theta, int j, int k);

// ---------------------------------------------------------------------------
// Small-divisor solvers (the content of Kolmogorov's theorem at trig-polynomial
// scale).
// ---------------------------------------------------------------------------

// Solve psi(z + theta) - psi(z) = h(z) - mean(h), mean(psi) = 0.
Fn1 solve_cohomological(const Fn1& h, const Theta& theta);

// Solve dN(U) = nu + k along U = d/dy + theta d/dz, with k = -mean(nu) and
// mean(N) = 0. Returns (N, k).
std::pair<Fn2, double> solve_directional(const Fn2& nu, const Theta& theta);

// Given kappa = kappa_density dv ^ dw with mean-zero density, produce the
// gauge-fixed primitive delta = -nu dv - (mu/2)(-theta dv + dw): modes with
// k != 0 go into nu, the remaining j != 0 modes into mu; both mean-zero.
// The gauge is slope-free: d delta = kappa holds for every theta.
std::pair<Fn2, Fn2> solve_exterior(const Fn2& kappa_density);

// ---------------------------------------------------------------------------
// Bivariate polynomial with biperiodic coefficients:
//   P(y,z) = sum_{monomials y^a z^k, a + k <= 2} m_{a,k}(y,z) y^a z^k
// The public contract only ever produces pure z-powers (frame-to-coordinate
// changes), but GL2 bookkeeping transiently needs y-monomials too, so the
// class carries the full degree-2 set. Degree overflow is an error: nothing
// representable in this artifact exceeds total degree 2.
// ---------------------------------------------------------------------------
struct ZPoly {
    // Monomial order: 1, y, z, y^2, y z, z^2.
    static constexpr int NMON = 6;
    std::array<Fn2, NMON> c;

    ZPoly() = default;
    static ZPoly from(const Fn2& f) {
        ZPoly p;
        p.c[0] = f;
        return p;
    }
    static ZPoly constant(double v) { return from(Fn2::constant(v)); }
    // coefficient * y^ay * z^az
    static ZPoly monomial(const Fn2& f, int ay, int az);

    double operator()(double y, double z) const;
    ZPoly d_dy() const;
    ZPoly d_dz() const;

    ZPoly operator+(const ZPoly& o) const;
    ZPoly operator-(const ZPoly& o) const;
    ZPoly operator*(double s) const;
    ZPoly operator*(const ZPoly& o) const; // throws DegreeOverflow past degree 2
    ZPoly operator*(const Fn2& f) const;

    bool is_periodic_part_only(double tol = 1e-12) const; // no monomials beyond 1
    Fn2 periodic_part() const { return c[0]; }
    double max_abs_coeff() const;
};

} // namespace lolight
