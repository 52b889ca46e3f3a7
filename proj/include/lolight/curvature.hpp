#pragma once

#include "lolight/model.hpp"

namespace lolight {

// Christoffel symbols Gamma^i_{jk} at a point: [i](j,k). Derivatives of the
// metric entries are spectral (exact for the symbolic entries); the _fd
// variants use central differences and exist as independent oracles.
using Christoffels = std::array<Mat3, 3>;

Christoffels christoffels(const CoordMetric& cm, double y, double z);
Christoffels christoffels(const MetricSpec& spec, const Vec3& p);
Christoffels christoffels_fd(const MetricField& field, const Vec3& p, double h = 1e-5);

// Riemann tensor R^i_{jkl} with R(d_k, d_l) d_j = R^i_{jkl} d_i, from exact
// first and second derivatives of the coordinate metric.
struct Riemann {
    double r[3][3][3][3];
};
Riemann riemann(const CoordMetric& cm, double y, double z);

// Metric-compatibility residual |nabla g| via finite differences of the
// entries against the exact Christoffels (cross-validation oracle).
double metric_compatibility_residual(const MetricSpec& spec, const Vec3& p, double h = 1e-5);

// sup_{grid, directions} |nabla_V d_x| -- zero for every valid spec.
double check_parallel_X(const MetricSpec& spec, int grid_n = 16);
double check_parallel_X_field(const MetricField& field, int grid_n = 16, double h = 1e-5);

// The scalar invariant r with the normalization g(Y,Y) = 1, vol(X,Y,Z) = 1:
// r = R(E2, E3, E2, E3) / (L^2 Lambda^2) in the moving frame.
double curvature_r(const MetricSpec& spec, const Vec3& p);

// A reusable evaluator (precomputes the symbolic entries once).
struct CurvatureEvaluator {
    explicit CurvatureEvaluator(const MetricSpec& spec);
    double operator()(double y, double z) const;
    const MetricSpec& spec() const { return spec_; }

  private:
    MetricSpec spec_;
    CoordMetric cm_;
};

double curvature_r_sup(const MetricSpec& spec, int grid_n = 32);

// Closed form r = (1/Lambda^2) ( (1/2L^2) d^2_y mu + (d^2_z L)/L ) for specs
// in the closed-leaf normal form (theta = 0, L = L(z), nu constant).
// Throws NotInNormalForm otherwise.
Fn2 curvature_r_closed_form(const MetricSpec& spec, int max_freq = 48);

// Quadrature of r against the parallel volume density Lambda L dy dz.
double gauss_bonnet(const MetricSpec& spec, int grid_n = 64);

// alpha(z) = -(1/2 Lambda) d_z L^2(z): the holonomy slope of the flat leaf
// F_z. Closed-leaf normal form required.
double leaf_holonomy_alpha(const MetricSpec& spec, double z);

// Independent ODE oracle: parallel transport of (d_x, d_y) around the two
// generating loops of the leaf F_z; returns the holonomy matrix (inverse of
// the transport) in the (d_x, d_y) basis at the base point (0, 0, z).
// direction = 1 for gamma_1 (x-loop), 2 for gamma_2 (y-loop).
struct Holonomy2 {
    double m[2][2];
    double off_leaf_residual; // |z-components| picked up, should be ~0
};
Holonomy2 parallel_transport_loop(const MetricSpec& spec, double z, int direction,
                                  int steps = 1 << 14);

} // namespace lolight
