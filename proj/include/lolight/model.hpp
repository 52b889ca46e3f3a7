#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lolight/periodic.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// Fundamental groups. The gamma variant is the (possibly parabolic) lattice
//   tau_x     : (x,y,z) -> (x+1, y, z)
//   tau_y     : (x,y,z) -> (x+c1, y+1, z)
//   tau_{z,n} : (x,y,z) -> (x+n*y+c2, y, z+1)
// acting on R^3; n != 0 is a lattice of the Heisenberg group. The torusA /
// torusB variants are the two translation groups of the non-closed-orbit
// family, with irrational tau.
// ---------------------------------------------------------------------------
struct Lattice {
    enum class Kind { gamma, torusA, torusB };
    Kind kind = Kind::gamma;
    int n = 0;
    double c1 = 0.0, c2 = 0.0; // gamma
    double tau = 0.0, r1 = 0.0, r2 = 0.0; // torusA / torusB

    static Lattice gamma(int n, double c1 = 0.0, double c2 = 0.0);
    static Lattice torusA(double tau, double r1, double r2);
    static Lattice torusB(double tau, double r1, double r2);

    bool is_gamma() const { return kind == Kind::gamma; }
    int generator_count() const { return 3; }
    // Action of generator g (0,1,2) or its inverse on a point.
    Vec3 apply_generator(int g, bool inverse, const Vec3& p) const;
};

// Word over generators: entries +1..+3 for generators, -1..-3 for inverses.
Vec3 lattice_action(const Lattice& lattice, const std::vector<int>& word, const Vec3& p);

// Arithmetic certificates. Rationality of Lcal/Lambda and k/Lambda cannot be
// read off floating point data, so classification branches that need it
// require a declaration, checked numerically at use time.
struct CertValue {
    enum class Kind { absent, rational, irrational };
    Kind kind = Kind::absent;
    Rational value; // meaningful for rational only
};

struct ArithCertificates {
    CertValue Lcal_over_Lambda;
    CertValue k_over_Lambda;
    std::optional<std::pair<int, int>> period; // (P, P') declaration for case (5)
};

// ---------------------------------------------------------------------------
// A metric given by its matrix in the moving frame
//   B_{n,theta} = (d_x, d_y + n z d_x + theta d_z, d_z):
//       [ 0        0        Lambda ]
//       [ 0        L2(y,z)  nu     ]
//       [ Lambda   nu       mu     ]
// For torusA: theta = 0, n = 0, L2 = L2(z), nu = mu = 0.
// For torusB: theta = 0, n = 0, L2 constant, nu = 0, mu = mu(y).
// ---------------------------------------------------------------------------
struct MetricSpec {
    Lattice lattice;
    Theta theta = Theta::rational(0, 1);
    double Lambda = 1.0;
    Fn2 L2 = Fn2::constant(1.0);
    Fn2 nu;
    Fn2 mu;
    ArithCertificates arith;

    int n() const { return lattice.is_gamma() ? lattice.n : 0; }
    // Throws MalformedInput when a structural invariant fails (positivity of
    // L2 on a 64x64 grid, torusA/torusB reduced shapes, theta range, ...).
    void validate() const;

    static MetricSpec flat(int n = 0, double Lambda = 1.0);
};

// Frame-basis matrix at a point (independent of x).
Mat3 metric_frame(const MetricSpec& spec, const Vec3& p);

// A tangent vector: base point and components in the coordinate basis
// (d_x, d_y, d_z).
struct TangentVector {
    Vec3 base{};
    Vec3 components{};
};

// g_p(u, v) for tangent vectors at a common base point.
double metric_pairing(const MetricSpec& spec, const TangentVector& u, const TangentVector& v);

// Entries of the metric in the coordinate basis (d_x, d_y, d_z), as bivariate
// polynomials with biperiodic coefficients. Symmetric storage:
// xx, xy, xz, yy, yz, zz.
struct CoordMetric {
    std::array<ZPoly, 6> g;
    Mat3 eval(double y, double z) const;
    // first derivatives: [entry][0] = d/dy, [1] = d/dz (d/dx vanishes)
    std::array<std::array<ZPoly, 2>, 6> d1;
    // second derivatives: [entry][0] = yy, [1] = yz, [2] = zz
    std::array<std::array<ZPoly, 3>, 6> d2;
};

CoordMetric metric_coords(const MetricSpec& spec);

// Pointwise coordinate-metric field; the symbolic path above feeds the exact
// evaluators, while test oracles may substitute arbitrary (e.g. corrupted)
// fields through this signature.
using MetricField = std::function<Mat3(const Vec3&)>;
MetricField coords_field(const MetricSpec& spec);

// Sup over lattice generators and grid samples of |gamma^* g - g|.
double check_invariance(const MetricSpec& spec, int grid_n = 16);
double check_invariance(const MetricField& field, const Lattice& lattice, int grid_n = 16);

// Lorentzian signature (-,+,+) check at grid samples; returns true when every
// sampled frame matrix has exactly one negative eigenvalue.
bool signature_is_lorentzian(const MetricSpec& spec, int grid_n = 16);

// ---------------------------------------------------------------------------
// Unipotent connection data on the 2-torus: the parallel-field log-scale a
// (Ybar = e^a Ybar_0) and the second Christoffel density b
// (Dbar_Z Z = b e^{-2a} Ybar). Every smooth pair arises from a metric.
// ---------------------------------------------------------------------------
struct ConnectionData {
    Fn2 a;
    Fn2 b;
    Theta theta = Theta::rational(0, 1);
};

struct FromConnectionOptions {
    std::optional<int> n_choice;     // overrides the default nLambda = C split
    int max_freq = 32;               // projection band for e^{2a}
};

MetricSpec metric_from_connection(const ConnectionData& data,
                                  const FromConnectionOptions& opts = {});

// Inverse direction: read (a, b) off a metric spec (a is the mean-zero-gauge
// log of L; b = Z.nu - Y.(mu/2) + n Lambda).
ConnectionData connection_of(const MetricSpec& spec, int max_freq = 32);

} // namespace lolight
