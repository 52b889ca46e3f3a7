#include "lolight/curvature.hpp"

#include <cmath>

namespace lolight {

namespace {

// Index map for the symmetric storage xx,xy,xz,yy,yz,zz.
constexpr int SYM[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

struct PointData {
    Mat3 g;
    Mat3 ginv;
    Mat3 dg[3];   // dg[c](i,j) = d_c g_ij (c = x is zero)
    Mat3 ddg[3][3];
};

PointData evaluate(const CoordMetric& cm, double y, double z) {
    PointData pd;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int e = SYM[i][j];
            pd.g(i, j) = cm.g[e](y, z);
            pd.dg[1](i, j) = cm.d1[e][0](y, z);
            pd.dg[2](i, j) = cm.d1[e][1](y, z);
            pd.ddg[1][1](i, j) = cm.d2[e][0](y, z);
            pd.ddg[1][2](i, j) = pd.ddg[2][1](i, j) = cm.d2[e][1](y, z);
            pd.ddg[2][2](i, j) = cm.d2[e][2](y, z);
        }
    pd.ginv = pd.g.inverse();
    return pd;
}

Christoffels christoffels_of(const PointData& pd) {
    Christoffels G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                double s = 0;
                for (int l = 0; l < 3; ++l)
                    s += pd.ginv(i, l) *
                         (pd.dg[j](l, k) + pd.dg[k](l, j) - pd.dg[l](j, k));
                G[i](j, k) = 0.5 * s;
            }
    return G;
}

// d_m Gamma^i_{jk}, exact: uses d(g^{-1}) = -g^{-1} (d g) g^{-1} and the
// second derivatives of the entries.
std::array<Christoffels, 3> christoffel_derivatives(const PointData& pd) {
    std::array<Christoffels, 3> dG{};
    Mat3 dginv[3];
    for (int m = 1; m <= 2; ++m) dginv[m] = (pd.ginv * pd.dg[m] * pd.ginv) * -1.0;
    for (int m = 1; m <= 2; ++m) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double s = 0;
                    for (int l = 0; l < 3; ++l) {
                        s += dginv[m](i, l) *
                             (pd.dg[j](l, k) + pd.dg[k](l, j) - pd.dg[l](j, k));
                        s += pd.ginv(i, l) *
                             (pd.ddg[m][j](l, k) + pd.ddg[m][k](l, j) - pd.ddg[m][l](j, k));
                    }
                    dG[m][i](j, k) = 0.5 * s;
                }
    }
    return dG;
}

} // namespace

Christoffels christoffels(const CoordMetric& cm, double y, double z) {
    return christoffels_of(evaluate(cm, y, z));
}

Christoffels christoffels(const MetricSpec& spec, const Vec3& p) {
    return christoffels(metric_coords(spec), p[1], p[2]);
}

Christoffels christoffels_fd(const MetricField& field, const Vec3& p, double h) {
    Mat3 g = field(p);
    Mat3 ginv = g.inverse();
    Mat3 dg[3];
    for (int c = 0; c < 3; ++c) {
        Vec3 pp = p, pm = p;
        pp[c] += h;
        pm[c] -= h;
        dg[c] = (field(pp) - field(pm)) * (0.5 / h);
    }
    Christoffels G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                double s = 0;
                for (int l = 0; l < 3; ++l)
                    s += ginv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
                G[i](j, k) = 0.5 * s;
            }
    return G;
}

Riemann riemann(const CoordMetric& cm, double y, double z) {
    PointData pd = evaluate(cm, y, z);
    Christoffels G = christoffels_of(pd);
    auto dG = christoffel_derivatives(pd);
    Riemann R;
    // R(d_k, d_l) d_j = R^i_{jkl} d_i
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    double s = dG[k][i](l, j) - dG[l][i](k, j);
                    for (int m = 0; m < 3; ++m)
                        s += G[i](k, m) * G[m](l, j) - G[i](l, m) * G[m](k, j);
                    R.r[i][j][k][l] = s;
                }
    return R;
}

double metric_compatibility_residual(const MetricSpec& spec, const Vec3& p, double h) {
    MetricField field = coords_field(spec);
    Christoffels G = christoffels(spec, p);
    Mat3 g = field(p);
    double worst = 0;
    for (int c = 0; c < 3; ++c) {
        Vec3 pp = p, pm = p;
        pp[c] += h;
        pm[c] -= h;
        Mat3 dg = (field(pp) - field(pm)) * (0.5 / h);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = dg(i, j);
                for (int l = 0; l < 3; ++l)
                    s -= G[l](c, i) * g(l, j) + G[l](c, j) * g(i, l);
                worst = std::max(worst, std::abs(s));
            }
    }
    return worst;
}

double check_parallel_X(const MetricSpec& spec, int grid_n) {
    CoordMetric cm = metric_coords(spec);
    double worst = 0;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            Christoffels G = christoffels(cm, static_cast<double>(i) / grid_n,
                                          static_cast<double>(j) / grid_n);
            // (nabla_{e_c} X)^i = Gamma^i_{c x}
            for (int c = 0; c < 3; ++c)
                for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(G[a](c, 0)));
        }
    return worst;
}

double check_parallel_X_field(const MetricField& field, int grid_n, double h) {
    double worst = 0;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            Vec3 p{0.21, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
            Christoffels G = christoffels_fd(field, p, h);
            for (int c = 0; c < 3; ++c)
                for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(G[a](c, 0)));
        }
    return worst;
}

CurvatureEvaluator::CurvatureEvaluator(const MetricSpec& spec)
    : spec_(spec), cm_(metric_coords(spec)) {}

double CurvatureEvaluator::operator()(double y, double z) const {
    Riemann R = riemann(cm_, y, z);
    double n = static_cast<double>(spec_.n());
    double th = spec_.theta.value();
    Vec3 E2{n * z, 1.0, th};
    Vec3 E3{0.0, 0.0, 1.0};
    // w = R(E2, E3) E2
    Vec3 w{};
    for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    s += R.r[i][j][k][l] * E2[j] * E2[k] * E3[l];
        w[i] = s;
    }
    Mat3 g = cm_.eval(y, z);
    double num = dot(g * w, E3);
    double L2 = spec_.L2(y, z);
    return num / (L2 * spec_.Lambda * spec_.Lambda);
}

double curvature_r(const MetricSpec& spec, const Vec3& p) {
    CurvatureEvaluator ev(spec);
    return ev(p[1], p[2]);
}

double curvature_r_sup(const MetricSpec& spec, int grid_n) {
    CurvatureEvaluator ev(spec);
    double worst = 0;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j)
            worst = std::max(worst, std::abs(ev(static_cast<double>(i) / grid_n,
                                               static_cast<double>(j) / grid_n)));
    return worst;
}

Fn2 curvature_r_closed_form(const MetricSpec& spec, int max_freq) {
    if (!spec.theta.is_zero())
        throw NotInNormalForm("closed-form r requires the theta = 0 chart");
    if (spec.L2.depends_on_y(1e-12))
        throw NotInNormalForm("closed-form r requires L = L(z)");
    if (!spec.nu.is_constant(1e-12))
        throw NotInNormalForm("closed-form r requires constant nu");
    Fn1 L2z = fiber_mean(spec.L2, 'y');
    int mf = std::max({max_freq, 4 * L2z.max_freq, 4 * spec.mu.max_z});
    Fn1 L = L2z.is_constant(0.0) ? Fn1::constant(std::sqrt(L2z.mean())) : sqrt_fn(L2z, mf);
    Fn1 Lzz = L.derivative().derivative();
    Fn1 term_z = L.is_constant(1e-15)
                     ? Fn1::constant(0.0)
                     : project1([&](double z) { return Lzz(z) / L(z); }, mf);
    Fn2 inv2L2 = Fn2::from_1d_z(L2z.is_constant(0.0)
                                    ? Fn1::constant(0.5 / L2z.mean())
                                    : project1([&](double z) { return 0.5 / L2z(z); }, mf));
    Fn2 r = inv2L2 * spec.mu.d_dy().d_dy() + Fn2::from_1d_z(term_z);
    return (r * (1.0 / (spec.Lambda * spec.Lambda))).trimmed(1e-15);
}

double gauss_bonnet(const MetricSpec& spec, int grid_n) {
    CurvatureEvaluator ev(spec);
    double acc = 0;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            double y = static_cast<double>(i) / grid_n;
            double z = static_cast<double>(j) / grid_n;
            acc += ev(y, z) * std::sqrt(spec.L2(y, z));
        }
    return spec.Lambda * acc / (static_cast<double>(grid_n) * grid_n);
}

namespace {
void require_closed_normal_form(const MetricSpec& spec) {
    if (!spec.theta.is_zero())
        throw NotInNormalForm("leaf holonomy requires the theta = 0 chart");
    if (spec.L2.depends_on_y(1e-12))
        throw NotInNormalForm("leaf holonomy requires L = L(z)");
    if (!spec.nu.is_constant(1e-12))
        throw NotInNormalForm("leaf holonomy requires constant nu");
}
} // namespace

double leaf_holonomy_alpha(const MetricSpec& spec, double z) {
    require_closed_normal_form(spec);
    Fn1 L2z = fiber_mean(spec.L2, 'y');
    return -L2z.derivative()(z) / (2.0 * spec.Lambda);
}

Holonomy2 parallel_transport_loop(const MetricSpec& spec, double z, int direction,
                                  int steps) {
    require_closed_normal_form(spec);
    if (direction != 1 && direction != 2)
        throw MalformedInput("loop direction must be 1 (x-loop) or 2 (y-loop)");
    CoordMetric cm = metric_coords(spec);

    // Transport equation dV/dt + Gamma(., T) V = 0 along the loop, RK4.
    // Loop gamma_1: (t, 0, z), tangent d_x; gamma_2: (0, t, z), tangent d_y.
    int tdir = (direction == 1) ? 0 : 1;
    auto rhs = [&](double t, const std::array<Vec3, 2>& V) {
        double y = (direction == 2) ? t : 0.0;
        Christoffels G = christoffels(cm, y, z);
        std::array<Vec3, 2> dV{};
        for (int v = 0; v < 2; ++v)
            for (int i = 0; i < 3; ++i) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += G[i](tdir, k) * V[v][k];
                dV[v][i] = -s;
            }
        return dV;
    };

    std::array<Vec3, 2> V{Vec3{1, 0, 0}, Vec3{0, 1, 0}};
    double h = 1.0 / steps;
    for (int sidx = 0; sidx < steps; ++sidx) {
        double t = sidx * h;
        auto add = [](const std::array<Vec3, 2>& a, const std::array<Vec3, 2>& b, double f) {
            std::array<Vec3, 2> r;
            for (int v = 0; v < 2; ++v)
                for (int i = 0; i < 3; ++i) r[v][i] = a[v][i] + f * b[v][i];
            return r;
        };
        auto k1 = rhs(t, V);
        auto k2 = rhs(t + 0.5 * h, add(V, k1, 0.5 * h));
        auto k3 = rhs(t + 0.5 * h, add(V, k2, 0.5 * h));
        auto k4 = rhs(t + h, add(V, k3, h));
        for (int v = 0; v < 2; ++v)
            for (int i = 0; i < 3; ++i)
                V[v][i] += h / 6.0 * (k1[v][i] + 2 * k2[v][i] + 2 * k3[v][i] + k4[v][i]);
    }

    // Transport matrix P in the (d_x, d_y) basis; the holonomy of the loop is
    // its inverse (the loop's deck transformation acts against the transport).
    double p00 = V[0][0], p01 = V[1][0];
    double p10 = V[0][1], p11 = V[1][1];
    double det = p00 * p11 - p01 * p10;
    Holonomy2 H;
    H.m[0][0] = p11 / det;
    H.m[0][1] = -p01 / det;
    H.m[1][0] = -p10 / det;
    H.m[1][1] = p00 / det;
    H.off_leaf_residual = std::max(std::abs(V[0][2]), std::abs(V[1][2]));
    return H;
}

} // namespace lolight
