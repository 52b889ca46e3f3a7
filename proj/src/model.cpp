#include "lolight/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace lolight {

Lattice Lattice::gamma(int n, double c1, double c2) {
    if (n < 0) throw MalformedInput("gamma lattice needs n >= 0");
    Lattice l;
    l.kind = Kind::gamma;
    l.n = n;
    l.c1 = c1;
    l.c2 = c2;
    return l;
}

Lattice Lattice::torusA(double tau, double r1, double r2) {
    Lattice l;
    l.kind = Kind::torusA;
    l.tau = tau;
    l.r1 = r1;
    l.r2 = r2;
    return l;
}

Lattice Lattice::torusB(double tau, double r1, double r2) {
    Lattice l;
    l.kind = Kind::torusB;
    l.tau = tau;
    l.r1 = r1;
    l.r2 = r2;
    return l;
}

Vec3 Lattice::apply_generator(int g, bool inverse, const Vec3& p) const {
    double s = inverse ? -1.0 : 1.0;
    Vec3 q = p;
    switch (kind) {
        case Kind::gamma:
            if (g == 0) {
                q[0] += s;
            } else if (g == 1) {
                q[0] += s * c1;
                q[1] += s;
            } else {
                // tau_{z,n}: x += n y + c2, z += 1; the inverse shifts z first
                if (!inverse) {
                    q[0] += n * q[1] + c2;
                    q[2] += 1.0;
                } else {
                    q[0] -= n * q[1] + c2;
                    q[2] -= 1.0;
                }
            }
            return q;
        case Kind::torusA:
            if (g == 0) {
                q[0] += s;
                q[1] += s * tau;
            } else if (g == 1) {
                q[1] += s;
            } else {
                q[0] += s * r1;
                q[1] += s * r2;
                q[2] += s;
            }
            return q;
        case Kind::torusB:
            if (g == 0) {
                q[0] += s;
                q[2] += s * tau;
            } else if (g == 1) {
                q[0] += s * r1;
                q[1] += s;
                q[2] += s * r2;
            } else {
                q[2] += s;
            }
            return q;
    }
    return q;
}

Vec3 lattice_action(const Lattice& lattice, const std::vector<int>& word, const Vec3& p) {
    Vec3 q = p;
    for (int w : word) {
        if (w == 0 || std::abs(w) > 3) throw MalformedInput("lattice word entries are +-1..3");
        q = lattice.apply_generator(std::abs(w) - 1, w < 0, q);
    }
    return q;
}

void MetricSpec::validate() const {
    if (Lambda == 0.0 || !std::isfinite(Lambda))
        throw MalformedInput("Lambda must be nonzero and finite");
    // L2 strictly positive on a 64x64 grid
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            if (L2(i / 64.0, j / 64.0) <= 0.0)
                throw MalformedInput("L2 must be strictly positive");
    if (lattice.kind == Lattice::Kind::torusA) {
        if (L2.depends_on_y(1e-12) || !nu.is_constant(1e-12) || std::abs(mean(nu)) > 1e-12 ||
            nu.max_abs_coeff() > 1e-12 || mu.max_abs_coeff() > 1e-12)
            throw MalformedInput("torusA requires L2 = L2(z), nu = mu = 0");
        if (!theta.is_zero()) throw MalformedInput("torusA uses the theta = 0 frame");
    } else if (lattice.kind == Lattice::Kind::torusB) {
        if (L2.depends_on_y(1e-12) || L2.depends_on_z(1e-12) || nu.max_abs_coeff() > 1e-12 ||
            mu.depends_on_z(1e-12))
            throw MalformedInput("torusB requires L2 constant, nu = 0, mu = mu(y)");
        if (!theta.is_zero()) throw MalformedInput("torusB uses the theta = 0 frame");
    }
    if (!lattice.is_gamma() && lattice.tau == std::floor(lattice.tau))
        throw MalformedInput("torus lattices require irrational tau (declared)");
}

MetricSpec MetricSpec::flat(int n, double Lambda) {
    MetricSpec s;
    s.lattice = Lattice::gamma(n);
    s.Lambda = Lambda;
    return s;
}

Mat3 metric_frame(const MetricSpec& spec, const Vec3& p) {
    Mat3 g;
    double y = p[1], z = p[2];
    g(0, 2) = g(2, 0) = spec.Lambda;
    g(1, 1) = spec.L2(y, z);
    g(1, 2) = g(2, 1) = spec.nu(y, z);
    g(2, 2) = spec.mu(y, z);
    return g;
}

double metric_pairing(const MetricSpec& spec, const TangentVector& u, const TangentVector& v) {
    if (max_abs({u.base[0] - v.base[0], u.base[1] - v.base[1], u.base[2] - v.base[2]}) > 1e-12)
        throw MalformedInput("metric_pairing needs a common base point");
    Mat3 g = coords_field(spec)(u.base);
    return dot(g * u.components, v.components);
}

CoordMetric metric_coords(const MetricSpec& spec) {
    if (!spec.lattice.is_gamma())
        throw MalformedInput("metric_coords requires a gamma lattice");
    double th = spec.theta.value();
    double n = static_cast<double>(spec.n());
    double La = spec.Lambda;

    // d_x = E1, d_y = E2 - n z E1 - theta E3, d_z = E3 in the moving frame,
    // so the coordinate matrix picks up n z and theta terms:
    //  g_xx = 0,  g_xy = -theta Lambda,           g_xz = Lambda
    //  g_yy = L2 + theta^2 mu - 2 theta nu + 2 n z theta Lambda
    //  g_yz = nu - theta mu - n z Lambda
    //  g_zz = mu
    CoordMetric cm;
    ZPoly z1 = ZPoly::monomial(Fn2::constant(1.0), 0, 1);
    cm.g[0] = ZPoly::constant(0.0);
    cm.g[1] = ZPoly::constant(-th * La);
    cm.g[2] = ZPoly::constant(La);
    cm.g[3] = ZPoly::from(spec.L2 + spec.mu * (th * th) - spec.nu * (2.0 * th)) +
              z1 * (2.0 * n * th * La);
    cm.g[4] = ZPoly::from(spec.nu - spec.mu * th) + z1 * (-n * La);
    cm.g[5] = ZPoly::from(spec.mu);

    for (int e = 0; e < 6; ++e) {
        cm.d1[e][0] = cm.g[e].d_dy();
        cm.d1[e][1] = cm.g[e].d_dz();
        cm.d2[e][0] = cm.d1[e][0].d_dy();
        cm.d2[e][1] = cm.d1[e][0].d_dz();
        cm.d2[e][2] = cm.d1[e][1].d_dz();
    }
    return cm;
}

Mat3 CoordMetric::eval(double y, double z) const {
    Mat3 m;
    m(0, 0) = g[0](y, z);
    m(0, 1) = m(1, 0) = g[1](y, z);
    m(0, 2) = m(2, 0) = g[2](y, z);
    m(1, 1) = g[3](y, z);
    m(1, 2) = m(2, 1) = g[4](y, z);
    m(2, 2) = g[5](y, z);
    return m;
}

MetricField coords_field(const MetricSpec& spec) {
    if (spec.lattice.is_gamma()) {
        auto cm = std::make_shared<CoordMetric>(metric_coords(spec));
        return [cm](const Vec3& p) { return cm->eval(p[1], p[2]); };
    }
    // torusA / torusB metrics are already in coordinate form (theta = 0, n = 0)
    MetricSpec s = spec;
    return [s](const Vec3& p) {
        Mat3 m;
        m(0, 2) = m(2, 0) = s.Lambda;
        m(1, 1) = s.L2(p[1], p[2]);
        m(1, 2) = m(2, 1) = s.nu(p[1], p[2]);
        m(2, 2) = s.mu(p[1], p[2]);
        return m;
    };
}

double check_invariance(const MetricField& field, const Lattice& lattice, int grid_n) {
    double worst = 0;
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < grid_n; ++i)
            for (int j = 0; j < grid_n; ++j) {
                Vec3 p{0.37, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
                Vec3 q = lattice.apply_generator(g, false, p);
                // all generators have differential [[1, s, 0],[0,1,0],[0,0,1]]
                // with s = n for tau_{z,n} on gamma lattices, 0 otherwise
                Mat3 J = Mat3::identity();
                if (lattice.is_gamma() && g == 2) J(0, 1) = static_cast<double>(lattice.n);
                Mat3 pulled = J.transposed() * field(q) * J;
                worst = std::max(worst, (pulled - field(p)).max_abs());
            }
    }
    return worst;
}

double check_invariance(const MetricSpec& spec, int grid_n) {
    return check_invariance(coords_field(spec), spec.lattice, grid_n);
}

bool signature_is_lorentzian(const MetricSpec& spec, int grid_n) {
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            Vec3 p{0.0, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
            auto ev = symmetric_eigenvalues(metric_frame(spec, p));
            int neg = 0, pos = 0;
            for (double e : ev) (e < 0 ? neg : pos)++;
            if (neg != 1 || pos != 2) return false;
        }
    return true;
}

MetricSpec metric_from_connection(const ConnectionData& data, const FromConnectionOptions& opts) {
    double C = mean(data.b);
    int n = 0;
    double Lambda = 1.0;
    if (std::abs(C) > 1e-14) {
        if (opts.n_choice) {
            n = *opts.n_choice;
            if (n <= 0) throw MalformedInput("n_choice must be positive when C != 0");
        } else {
            n = std::max(1, static_cast<int>(std::ceil(std::abs(C) - 1e-12)));
        }
        Lambda = C / static_cast<double>(n);
    } else {
        if (opts.n_choice && *opts.n_choice != 0)
            throw MalformedInput("C = 0 forces n = 0");
        n = 0;
        Lambda = 1.0;
    }

    MetricSpec spec;
    spec.lattice = Lattice::gamma(n);
    spec.theta = data.theta;
    spec.Lambda = Lambda;
    if (data.a.is_constant(0.0)) {
        spec.L2 = Fn2::constant(std::exp(2.0 * data.a.mean()));
    } else {
        spec.L2 = exp_fn(data.a * 2.0, std::max(opts.max_freq, 2 * data.a.max_y),
                         std::max(opts.max_freq, 2 * data.a.max_z));
    }
    Fn2 kappa = data.b + (-C);
    auto [nu, mu] = solve_exterior(kappa);
    spec.nu = nu;
    spec.mu = mu;
    spec.validate();
    return spec;
}

ConnectionData connection_of(const MetricSpec& spec, int max_freq) {
    ConnectionData cd;
    cd.theta = spec.theta;
    if (spec.L2.is_constant(1e-15)) {
        cd.a = Fn2::constant(0.5 * std::log(spec.L2.mean()));
    } else {
        cd.a = log_fn(spec.L2, std::max(max_freq, spec.L2.max_y), std::max(max_freq, spec.L2.max_z)) *
               0.5;
    }
    double th = spec.theta.value();
    // b = Z.nu - Ybar.(mu/2) + n Lambda along Ybar = d_y + theta d_z, Z = d_z
    cd.b = spec.nu.d_dz() - (spec.mu.d_dy() + spec.mu.d_dz() * th) * 0.5 +
           static_cast<double>(spec.n()) * spec.Lambda;
    return cd;
}

} // namespace lolight
