#include "lolight/transforms.hpp"

#include <cmath>

#include "lolight/curvature.hpp"

namespace lolight {

// ------------------------------ XShear --------------------------------------

double XShear::eval(double y, double z) const {
    return c + Ay * y + Bz * z + qyy * y * y + qyz * y * z + qzz * z * z + y * py(z) +
           z * p1(z) + f2(y, z);
}

double XShear::ddy(double y, double z) const {
    return Ay + 2 * qyy * y + qyz * z + py(z) + f2.d_dy()(y, z);
}

double XShear::ddz(double y, double z) const {
    return Bz + qyz * y + 2 * qzz * z + y * py.derivative()(z) + p1(z) +
           z * p1.derivative()(z) + f2.d_dz()(y, z);
}

XShear XShear::operator+(const XShear& o) const {
    XShear r = *this;
    r.c += o.c;
    r.Ay += o.Ay;
    r.Bz += o.Bz;
    r.qyy += o.qyy;
    r.qyz += o.qyz;
    r.qzz += o.qzz;
    r.py = py + o.py;
    r.p1 = p1 + o.p1;
    r.f2 = f2 + o.f2;
    return r;
}

XShear XShear::operator-(const XShear& o) const { return *this + o * -1.0; }

XShear XShear::operator*(double s) const {
    XShear r = *this;
    r.c *= s;
    r.Ay *= s;
    r.Bz *= s;
    r.qyy *= s;
    r.qyz *= s;
    r.qzz *= s;
    r.py = py * s;
    r.p1 = p1 * s;
    r.f2 = f2 * s;
    return r;
}

bool XShear::is_zero(double tol) const { return max_abs() <= tol; }

double XShear::max_abs() const {
    return std::max({std::abs(c), std::abs(Ay), std::abs(Bz), std::abs(qyy), std::abs(qyz),
                     std::abs(qzz), py.max_abs_coeff(), p1.max_abs_coeff(),
                     f2.max_abs_coeff()});
}

// ------------------------------ AffMap --------------------------------------

Vec3 AffMap::operator()(const Vec3& p) const {
    double y = p[1], z = p[2];
    return Vec3{s1 * p[0] + xs.eval(y, z), m11 * y + m12 * z + sy(z) + ty,
                m21 * y + m22 * z + tz};
}

Mat3 AffMap::differential(const Vec3& p) const {
    double y = p[1], z = p[2];
    Mat3 J;
    J(0, 0) = s1;
    J(0, 1) = xs.ddy(y, z);
    J(0, 2) = xs.ddz(y, z);
    J(1, 1) = static_cast<double>(m11);
    J(1, 2) = static_cast<double>(m12) + sy.derivative()(z);
    J(2, 1) = static_cast<double>(m21);
    J(2, 2) = static_cast<double>(m22);
    return J;
}

bool AffMap::is_identity(double tol) const {
    return s1 == 1.0 && m11 == 1 && m12 == 0 && m21 == 0 && m22 == 1 && xs.is_zero(tol) &&
           sy.max_abs_coeff() <= tol && std::abs(ty) <= tol && std::abs(tz) <= tol;
}

AffMap AffMap::translation(double tx, double tyy, double tzz) {
    AffMap m;
    m.xs.c = tx;
    m.ty = tyy;
    m.tz = tzz;
    return m;
}

AffMap AffMap::x_shear(const Fn2& f) {
    AffMap m;
    m.xs.f2 = f;
    return m;
}

AffMap AffMap::x_shear_int(long A, long B) {
    AffMap m;
    m.xs.Ay = static_cast<double>(A);
    m.xs.Bz = static_cast<double>(B);
    return m;
}

AffMap AffMap::sigma() { return x_shear_int(0, 1); }

AffMap AffMap::flow_Y(double s, int n) {
    AffMap m;
    m.xs.Bz = s * n;
    m.ty = s;
    return m;
}

AffMap AffMap::flow_Z(double t) {
    AffMap m;
    m.tz = t;
    return m;
}

AffMap AffMap::flow_frame(double s, int n, double theta) {
    // flow of d_y + n z d_x + theta d_z:
    // (x + n z s + n theta s^2/2, y + s, z + theta s)
    AffMap m;
    m.xs.Bz = s * n;
    m.xs.c = 0.5 * n * theta * s * s;
    m.ty = s;
    m.tz = theta * s;
    return m;
}

AffMap AffMap::phi0(int n, double theta) {
    if (n == 0) throw MalformedInput("phi0 requires n != 0");
    AffMap m;
    m.xs.Bz = 1.0;
    m.tz = theta / static_cast<double>(n);
    return m;
}

AffMap AffMap::signs(int e1, int e2, int e3) {
    if (std::abs(e1) != 1 || std::abs(e2) != 1 || std::abs(e3) != 1)
        throw MalformedInput("sign flips must be +-1");
    AffMap m;
    m.s1 = e1;
    m.m11 = e2;
    m.m22 = e3;
    return m;
}

AffMap AffMap::gl2_normalizer(long a, long b, long c, long d, int n) {
    if (a * d - b * c != 1)
        throw NonUnimodular("gl2_normalizer expects an SL2(Z) matrix");
    // x-shear n (b c y z + (1/2) a c (y^2 - y) + (1/2) b d (z^2 - z)) makes
    // the linear map a Gamma_n-normalizer.
    AffMap m;
    m.m11 = a;
    m.m12 = b;
    m.m21 = c;
    m.m22 = d;
    m.xs.qyz = static_cast<double>(n) * b * c;
    m.xs.qyy = 0.5 * n * a * c;
    m.xs.Ay = -0.5 * n * a * c;
    m.xs.qzz = 0.5 * n * b * d;
    m.xs.Bz = -0.5 * n * b * d;
    return m;
}

namespace {

// periodic reparametrization f(m z + t) for m = +-1, exact
Fn1 recompose1(const Fn1& f, long m, double t) {
    if (f.max_abs_coeff() == 0.0) return Fn1::constant(f.a[0]);
    if (m == 1) return f.shifted(t);
    if (m == -1) return f.reflected().shifted(-t);
    // |m| > 1: frequencies scale; still periodic
    Fn1 g = f.rescaled_argument(static_cast<int>(m));
    return g.shifted(t / static_cast<double>(m));
}

// f2 composed with the (y,z) part of `inner`, exact when inner.sy == 0.
Fn2 compose_fn2(const Fn2& f, const AffMap& inner, int band, double* tail = nullptr) {
    if (f.max_abs_coeff() == 0.0) return Fn2::constant(0.0);
    if (f.is_constant(0.0)) return f;
    if (inner.sy.max_abs_coeff() == 0.0) {
        return f.shifted(inner.ty, inner.tz)
            .linear_substitution(inner.m11, inner.m12, inner.m21, inner.m22);
    }
    if (inner.m21 != 0)
        throw UnrepresentableComposition("f2 over a y-shifted map with m21 != 0");
    if (std::abs(inner.m22) != 1)
        throw UnrepresentableComposition("f2 over a y-shifted map with |m22| != 1");
    // f(m11 y + m12 z + sy(z) + ty, m22 z + tz): shift the first argument by
    // s~(z') = sy(m22 (z' - tz)) after the affine substitution, using
    // recompose1(f, m, t) = f(m z + t) with t = -m22 tz.
    Fn1 stil = recompose1(inner.sy, inner.m22, -static_cast<double>(inner.m22) * inner.tz);
    double t = 0;
    Fn2 shifted = compose_y_shift(f, stil, std::max(band, f.max_z + 8), &t);
    if (tail) *tail = std::max(*tail, t);
    return shifted.shifted(inner.ty, inner.tz)
        .linear_substitution(inner.m11, inner.m12, 0, inner.m22);
}

} // namespace

AffMap AffMap::compose(const AffMap& o, const AffMap& i, int band) {
    AffMap r;
    r.s1 = o.s1 * i.s1;

    // linear parts
    r.m11 = o.m11 * i.m11 + o.m12 * i.m21;
    r.m12 = o.m11 * i.m12 + o.m12 * i.m22;
    r.m21 = o.m21 * i.m11 + o.m22 * i.m21;
    r.m22 = o.m21 * i.m12 + o.m22 * i.m22;

    bool inner_shifted = i.sy.max_abs_coeff() > 0.0;
    if (inner_shifted && o.m21 != 0)
        throw UnrepresentableComposition("inner periodic y-shift feeds the outer z row");

    // y row
    r.ty = o.m11 * i.ty + o.m12 * i.tz + o.ty;
    r.sy = i.sy * static_cast<double>(o.m11);
    if (o.sy.max_abs_coeff() > 0.0) {
        if (i.m21 != 0)
            throw UnrepresentableComposition("outer sy over a map whose z row mixes y");
        // o.sy(Zi) with Zi = m22 z + tz
        r.sy = r.sy + recompose1(o.sy, i.m22, i.tz);
    }

    // z row
    r.tz = o.m21 * i.ty + o.m22 * i.tz + o.tz;

    // x row: s1_o * i.xs + o.xs(Yi, Zi)
    r.xs = i.xs * o.s1;

    const long a = i.m11, b = i.m12, cjk = i.m21, d = i.m22;
    const double tyi = i.ty, tzi = i.tz;
    const Fn1& syi = i.sy;
    XShear add;

    // constant
    add.c += o.xs.c;
    // Ay * Yi
    add.Ay += o.xs.Ay * a;
    add.Bz += o.xs.Ay * b;
    add.c += o.xs.Ay * tyi;
    add.f2 = add.f2 + Fn2::from_1d_z(syi * o.xs.Ay);
    // Bz * Zi
    add.Ay += o.xs.Bz * cjk;
    add.Bz += o.xs.Bz * d;
    add.c += o.xs.Bz * tzi;
    // qyy * Yi^2
    if (o.xs.qyy != 0) {
        add.qyy += o.xs.qyy * a * a;
        add.qzz += o.xs.qyy * b * b;
        add.qyz += o.xs.qyy * 2.0 * a * b;
        add.Ay += o.xs.qyy * 2.0 * a * tyi;
        add.Bz += o.xs.qyy * 2.0 * b * tyi;
        add.c += o.xs.qyy * tyi * tyi;
        if (syi.max_abs_coeff() > 0) {
            add.py = add.py + syi * (o.xs.qyy * 2.0 * a);
            add.p1 = add.p1 + syi * (o.xs.qyy * 2.0 * b);
            add.f2 = add.f2 + Fn2::from_1d_z(syi * syi * o.xs.qyy + syi * (o.xs.qyy * 2.0 * tyi));
        }
    }
    // qzz * Zi^2
    if (o.xs.qzz != 0) {
        add.qyy += o.xs.qzz * cjk * cjk;
        add.qzz += o.xs.qzz * d * d;
        add.qyz += o.xs.qzz * 2.0 * cjk * d;
        add.Ay += o.xs.qzz * 2.0 * cjk * tzi;
        add.Bz += o.xs.qzz * 2.0 * d * tzi;
        add.c += o.xs.qzz * tzi * tzi;
    }
    // qyz * Yi * Zi
    if (o.xs.qyz != 0) {
        add.qyy += o.xs.qyz * a * cjk;
        add.qzz += o.xs.qyz * b * d;
        add.qyz += o.xs.qyz * (a * d + b * cjk);
        add.Ay += o.xs.qyz * (a * tzi + cjk * tyi);
        add.Bz += o.xs.qyz * (b * tzi + d * tyi);
        add.c += o.xs.qyz * tyi * tzi;
        if (syi.max_abs_coeff() > 0) {
            add.py = add.py + syi * (o.xs.qyz * static_cast<double>(cjk));
            add.p1 = add.p1 + syi * (o.xs.qyz * static_cast<double>(d));
            add.f2 = add.f2 + Fn2::from_1d_z(syi * (o.xs.qyz * tzi));
        }
    }
    // y * py(z) term: Yi * py(Zi)
    if (o.xs.py.max_abs_coeff() > 0) {
        if (cjk != 0)
            throw UnrepresentableComposition("py over a map whose z row mixes y");
        Fn1 P = recompose1(o.xs.py, d, tzi);
        add.py = add.py + P * static_cast<double>(a);
        add.p1 = add.p1 + P * static_cast<double>(b);
        add.f2 = add.f2 + Fn2::from_1d_z(P * syi + P * tyi);
    }
    // z * p1(z) term: Zi * p1(Zi)
    if (o.xs.p1.max_abs_coeff() > 0) {
        if (cjk != 0)
            throw UnrepresentableComposition("p1 over a map whose z row mixes y");
        Fn1 P = recompose1(o.xs.p1, d, tzi);
        add.p1 = add.p1 + P * static_cast<double>(d);
        add.f2 = add.f2 + Fn2::from_1d_z(P * tzi);
    }
    // f2 term
    if (o.xs.f2.max_abs_coeff() > 0) add.f2 = add.f2 + compose_fn2(o.xs.f2, i, band);

    r.xs = r.xs + add;
    r.sy = r.sy.trimmed(0.0);
    r.xs.py = r.xs.py.trimmed(0.0);
    r.xs.p1 = r.xs.p1.trimmed(0.0);
    r.xs.f2 = r.xs.f2.trimmed(0.0);
    return r;
}

AffMap pow(const AffMap& m, int k) {
    if (k < 0) throw MalformedInput("pow: negative powers not supported");
    AffMap r = AffMap::identity();
    for (int i = 0; i < k; ++i) r = AffMap::compose(r, m);
    return r;
}

// --------------------------- normalizer test --------------------------------

namespace {

AffMap lattice_generator_map(const Lattice& l, int g) {
    switch (l.kind) {
        case Lattice::Kind::gamma:
            if (g == 0) return AffMap::translation(1, 0, 0);
            if (g == 1) return AffMap::translation(l.c1, 1, 0);
            {
                AffMap m = AffMap::translation(l.c2, 0, 1);
                m.xs.Ay = static_cast<double>(l.n);
                return m;
            }
        case Lattice::Kind::torusA:
            if (g == 0) return AffMap::translation(1, l.tau, 0);
            if (g == 1) return AffMap::translation(0, 1, 0);
            return AffMap::translation(l.r1, l.r2, 1);
        case Lattice::Kind::torusB:
            if (g == 0) return AffMap::translation(1, 0, l.tau);
            if (g == 1) return AffMap::translation(l.r1, 1, l.r2);
            return AffMap::translation(0, 0, 1);
    }
    throw Error("unreachable");
}

bool fn1_equal(const Fn1& f, const Fn1& g, double tol) {
    return (f - g).max_abs_coeff() <= tol;
}

// largest non-constant ingredient of an x-shear (the f2 mean counts as
// constant) and the total constant part
double shear_nonconstant(const XShear& x) {
    Fn2 f = x.f2 + (-mean(x.f2));
    return std::max({std::abs(x.Ay), std::abs(x.Bz), std::abs(x.qyy), std::abs(x.qyz),
                     std::abs(x.qzz), x.py.max_abs_coeff(), x.p1.max_abs_coeff(),
                     f.max_abs_coeff()});
}

double shear_constant(const XShear& x) { return x.c + mean(x.f2); }

} // namespace

bool normalizes_lattice(const AffMap& map, const Lattice& lattice, double tol) {
    for (int g = 0; g < 3; ++g) {
        AffMap gamma = lattice_generator_map(lattice, g);
        AffMap k;
        try {
            k = AffMap::compose(map, gamma);
        } catch (const UnrepresentableComposition&) {
            return false;
        }
        // Need a lattice element gamma' with k == gamma' . map. The linear
        // parts of k and map already agree (gamma is a translation except for
        // the x row), so only the shifts must match a lattice element.
        if (k.m11 != map.m11 || k.m12 != map.m12 || k.m21 != map.m21 || k.m22 != map.m22)
            return false;
        if (!fn1_equal(k.sy, map.sy, tol)) return false;

        double dz = k.tz - map.tz;
        double dy = k.ty - map.ty;
        XShear dx = k.xs - map.xs;

        if (lattice.kind == Lattice::Kind::gamma) {
            // gamma' = (x + alpha + cz n y + c1 beta + c2 cz, y + beta, z + cz)
            if (!nearly_integer(dz, tol) || !nearly_integer(dy, tol)) return false;
            double cz = std::round(dz), beta = std::round(dy);
            double czn = cz * static_cast<double>(lattice.n);
            // x part of gamma' . map - map.xs must be
            //   alpha + czn (m11 y + m12 z + sy(z) + ty) + c1 beta + c2 cz
            XShear resid = dx;
            resid.Ay -= czn * map.m11;
            resid.Bz -= czn * map.m12;
            resid.f2 = resid.f2 - Fn2::from_1d_z(map.sy * czn);
            if (shear_nonconstant(resid) > tol) return false;
            double alpha = shear_constant(resid) - czn * map.ty - lattice.c1 * beta -
                           lattice.c2 * cz;
            if (!nearly_integer(alpha, tol)) return false;
        } else if (lattice.kind == Lattice::Kind::torusA) {
            // gamma' translation (a + c r1, a tau + b + c r2, c)
            if (shear_nonconstant(dx) > tol) return false;
            if (!nearly_integer(dz, tol)) return false;
            double cz = std::round(dz);
            double a = shear_constant(dx) - cz * lattice.r1;
            if (!nearly_integer(a, tol)) return false;
            double b = dy - std::round(a) * lattice.tau - cz * lattice.r2;
            if (!nearly_integer(b, tol)) return false;
        } else {
            // torusB: (a + b r1, b, a tau + b r2 + c)
            if (shear_nonconstant(dx) > tol) return false;
            if (!nearly_integer(dy, tol)) return false;
            double b = std::round(dy);
            double a = shear_constant(dx) - b * lattice.r1;
            if (!nearly_integer(a, tol)) return false;
            double cc = dz - std::round(a) * lattice.tau - b * lattice.r2;
            if (!nearly_integer(cc, tol)) return false;
        }
    }
    return true;
}

// ------------------------------ pullbacks -----------------------------------

std::vector<Mat3> pullback(const MetricField& field, const AffMap& map, int grid_n) {
    std::vector<Mat3> out(static_cast<std::size_t>(grid_n) * grid_n);
    parallel_for(out.size(), [&](std::size_t idx) {
        int i = static_cast<int>(idx) / grid_n, j = static_cast<int>(idx) % grid_n;
        Vec3 p{0.0, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
        Mat3 J = map.differential(p);
        out[idx] = J.transposed() * field(map(p)) * J;
    });
    return out;
}

std::vector<Mat3> pullback(const MetricSpec& spec, const AffMap& map, int grid_n) {
    return pullback(coords_field(spec), map, grid_n);
}

AffineDefect affine_defect_field(const MetricField& field, const AffMap& map, int grid_n) {
    AffineDefect d;
    d.lambda = map.s1;
    std::vector<double> Cs(static_cast<std::size_t>(grid_n) * grid_n);
    std::vector<double> res(Cs.size());
    parallel_for(Cs.size(), [&](std::size_t idx) {
        int i = static_cast<int>(idx) / grid_n, j = static_cast<int>(idx) % grid_n;
        Vec3 p{0.0, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
        Mat3 g = field(p);
        Mat3 J = map.differential(p);
        Mat3 delta = J.transposed() * field(map(p)) * J - g;
        // Xb = g(d_x, .) row; T = Xb (x) Xb
        Vec3 xb{g(0, 0), g(0, 1), g(0, 2)};
        double czz = xb[2] * xb[2];
        double cp = delta(2, 2) / czz; // the g(d_z, d_z) channel anchors C
        double worst = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                worst = std::max(worst, std::abs(delta(a, b) - cp * xb[a] * xb[b]));
        Cs[idx] = cp;
        res[idx] = worst;
    });
    double mean_c = 0;
    for (double c : Cs) mean_c += c;
    mean_c /= static_cast<double>(Cs.size());
    d.C = mean_c;
    for (std::size_t i = 0; i < Cs.size(); ++i) {
        d.C_spread = std::max(d.C_spread, std::abs(Cs[i] - mean_c));
        d.residual = std::max(d.residual, res[i]);
    }
    return d;
}

AffineDefect affine_defect(const MetricSpec& spec, const AffMap& map, int grid_n) {
    if (!normalizes_lattice(map, spec.lattice))
        throw NotLatticeNormalizing("map does not normalize the fundamental group");
    return affine_defect_field(coords_field(spec), map, grid_n);
}

std::pair<Mat3, Mat3> decompose_E(const MetricSpec& spec, const AffMap& map, const Vec3& p) {
    MetricField field = coords_field(spec);
    Mat3 g = field(p);
    Mat3 J = map.differential(p);
    Mat3 pulled = J.transposed() * field(map(p)) * J;
    Mat3 E = g.inverse() * pulled;
    Mat3 N = E - Mat3::identity();
    return {E, N};
}

double check_r_invariance(const MetricSpec& spec, const AffMap& map, int grid_n) {
    CurvatureEvaluator ev(spec);
    double worst = 0;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            Vec3 p{0.0, static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
            Vec3 q = map(p);
            worst = std::max(worst, std::abs(ev(q[1], q[2]) - ev(p[1], p[2])));
        }
    return worst;
}

// --------------------------- symbolic pullback ------------------------------

MetricSpec pullback_spec(const MetricSpec& spec, const AffMap& map, const Theta& theta_new,
                         double tol, int band, double* tail) {
    if (!spec.lattice.is_gamma())
        throw MalformedInput("pullback_spec handles gamma lattices");
    double n = static_cast<double>(spec.n());
    double th_old = spec.theta.value();
    double th_new = theta_new.value();

    // Differential columns as ZPoly in the source coordinates (y,z):
    // J e = (dx' parts, dy' parts, dz' parts).
    Fn1 syd = map.sy.derivative();
    ZPoly Jxy = ZPoly::from(map.xs.f2.d_dy() + Fn2::from_1d_z(map.xs.py) +
                            Fn2::constant(map.xs.Ay)) +
                ZPoly::monomial(Fn2::constant(2.0 * map.xs.qyy), 1, 0) +
                ZPoly::monomial(Fn2::constant(map.xs.qyz), 0, 1);
    ZPoly Jxz = ZPoly::from(map.xs.f2.d_dz() + Fn2::from_1d_z(map.xs.p1) +
                            Fn2::constant(map.xs.Bz)) +
                ZPoly::monomial(Fn2::constant(map.xs.qyz), 1, 0) +
                ZPoly::monomial(Fn2::constant(2.0 * map.xs.qzz), 0, 1) +
                ZPoly::monomial(Fn2::from_1d_z(map.xs.py.derivative()), 1, 0) +
                ZPoly::monomial(Fn2::from_1d_z(map.xs.p1.derivative()), 0, 1);
    ZPoly Jyy = ZPoly::constant(static_cast<double>(map.m11));
    ZPoly Jyz = ZPoly::from(Fn2::from_1d_z(syd) + Fn2::constant(static_cast<double>(map.m12)));
    ZPoly Jzy = ZPoly::constant(static_cast<double>(map.m21));
    ZPoly Jzz = ZPoly::constant(static_cast<double>(map.m22));
    ZPoly s1 = ZPoly::constant(map.s1);

    // New-frame vectors in source coordinates: E1 = (1,0,0),
    // E2 = (n z, 1, th_new), E3 = (0,0,1).
    ZPoly nz = ZPoly::monomial(Fn2::constant(n), 0, 1);

    struct VecZ {
        ZPoly x, y, z;
    };
    auto push = [&](const VecZ& v) {
        // w = J v
        VecZ w;
        w.x = s1 * v.x + Jxy * v.y + Jxz * v.z;
        w.y = Jyy * v.y + Jyz * v.z;
        w.z = Jzy * v.y + Jzz * v.z;
        return w;
    };
    VecZ E1{ZPoly::constant(1.0), ZPoly::constant(0.0), ZPoly::constant(0.0)};
    VecZ E2{nz, ZPoly::constant(1.0), ZPoly::constant(th_new)};
    VecZ E3{ZPoly::constant(0.0), ZPoly::constant(0.0), ZPoly::constant(1.0)};
    VecZ w1 = push(E1), w2 = push(E2), w3 = push(E3);

    // Express in the old frame at the image point: e2 = w_y, e3 = w_z - th w_y,
    // e1 = w_x - n z_im w_y with z_im = m21 y + m22 z + tz.
    ZPoly z_im = ZPoly::monomial(Fn2::constant(n * map.m21), 1, 0) +
                 ZPoly::monomial(Fn2::constant(n * map.m22), 0, 1) +
                 ZPoly::constant(n * map.tz);
    auto frame = [&](const VecZ& w) {
        VecZ e;
        e.y = w.y;                                  // e2
        e.z = w.z - w.y * th_old;                   // e3
        e.x = w.x - z_im * w.y;                     // e1 (z_im already has n)
        return e;
    };
    VecZ f1 = frame(w1), f2v = frame(w2), f3 = frame(w3);

    // entries at the image point
    Fn2 L2c = compose_fn2(spec.L2, map, band, tail);
    Fn2 nuc = compose_fn2(spec.nu, map, band, tail);
    Fn2 muc = compose_fn2(spec.mu, map, band, tail);

    auto ip = [&](const VecZ& u, const VecZ& v) {
        ZPoly r = (u.x * v.z + u.z * v.x) * spec.Lambda;
        r = r + (u.y * v.y) * L2c;
        r = r + (u.y * v.z + u.z * v.y) * nuc;
        r = r + (u.z * v.z) * muc;
        return r;
    };

    ZPoly e11 = ip(f1, f1), e12 = ip(f1, f2v), e13 = ip(f1, f3);
    ZPoly e22 = ip(f2v, f2v), e23 = ip(f2v, f3), e33 = ip(f3, f3);

    double scale = std::max({1.0, std::abs(spec.Lambda), spec.L2.max_abs_coeff(),
                             spec.mu.max_abs_coeff(), spec.nu.max_abs_coeff()});
    auto require_periodic = [&](const ZPoly& p, const char* what) {
        for (int i = 1; i < ZPoly::NMON; ++i)
            if (p.c[i].max_abs_coeff() > tol * scale)
                throw VerificationFailed(std::string("pullback entry ") + what +
                                         " is not frame-invariant");
        return p.periodic_part();
    };
    Fn2 g11 = require_periodic(e11, "(1,1)");
    Fn2 g12 = require_periodic(e12, "(1,2)");
    Fn2 g13 = require_periodic(e13, "(1,3)");
    if (g11.max_abs_coeff() > tol * scale || g12.max_abs_coeff() > tol * scale)
        throw VerificationFailed("pullback does not preserve the lightlike frame row");
    if (!g13.is_constant(tol * scale))
        throw VerificationFailed("pullback Lambda entry is not constant");

    MetricSpec out;
    out.lattice = spec.lattice;
    out.theta = theta_new;
    out.Lambda = g13.mean();
    out.L2 = require_periodic(e22, "(2,2)").trimmed(1e-13 * scale);
    out.nu = require_periodic(e23, "(2,3)").trimmed(1e-13 * scale);
    out.mu = require_periodic(e33, "(3,3)").trimmed(1e-13 * scale);
    out.arith = spec.arith;
    return out;
}

// ------------------------------ generators ----------------------------------

namespace {

// The affine morphism without its eta gauge: y -> y + l H(z), x-shear with
// the quadratic and periodic corrections that keep it in the Gamma_n
// normalizer (x-increment under tau_z must be n l z + n l P(z) + const).
AffMap phi_lAB_bare(const NormalFormClosed& nf, int ell, int A, int B) {
    Fn1 P = nf.H_periodic_part(std::max(48, 4 * nf.L2.max_freq));
    double l = static_cast<double>(ell);
    double n = static_cast<double>(nf.n);
    AffMap m;
    m.m12 = ell;
    m.sy = P * l;
    m.xs.qzz = 0.5 * n * l;
    m.xs.Bz = static_cast<double>(B);
    m.xs.Ay = static_cast<double>(A);
    m.xs.p1 = P * (n * l);
    return m;
}

} // namespace

Fn1 eta_of(const NormalFormClosed& nf, int ell) {
    // Determined by the requirement that z -> int_0^1 (phi^* g)(d_z, d_z) dy
    // be constant: the x-shear -eta contributes -2 Lambda eta' to that entry,
    // so eta integrates the z-variation of the bare pullback's fiber mean.
    AffMap bare = phi_lAB_bare(nf, ell, 0, 0);
    MetricSpec pulled = pullback_spec(nf.to_spec(), bare, Theta::rational(0, 1), 1e-9,
                                      std::max(48, 4 * nf.mu.max_z + 8 * std::abs(ell)));
    Fn1 I = fiber_mean(pulled.mu, 'y');
    Fn1 etad = (I - Fn1::constant(I.mean())) * (1.0 / (2.0 * nf.Lambda));
    return etad.antiderivative_mean_zero();
}

AffMap phi_lAB(const NormalFormClosed& nf, int ell, int A, int B) {
    AffMap m = phi_lAB_bare(nf, ell, A, B);
    m.xs.f2 = Fn2::from_1d_z(eta_of(nf, ell) * -1.0);
    return m;
}

namespace {

Rational require_rational_cert(const CertValue& cv, const char* what) {
    if (cv.kind != CertValue::Kind::rational)
        throw CertificateMissing(std::string(what) + " requires a rational certificate");
    return cv.value;
}

} // namespace

AffMap make_generator(const std::string& kind, const GeneratorParams& params,
                      const NormalFormClosed& nf) {
    if (kind == "sigma") return AffMap::sigma();
    if (kind == "flowY") return AffMap::flow_Y(params.s, nf.n);
    if (kind == "flowZ") return AffMap::flow_Z(params.s);
    if (kind == "phi_lAB") return phi_lAB(nf, params.ell, params.A, params.B);
    if (kind == "psi") {
        if (nf.n == 0) throw IncompatibleNormalForm("psi requires n != 0");
        if (!nf.arith.period) throw CertificateMissing("psi requires a declared period (P, P')");
        auto [Pp, Pprime] = *nf.arith.period;
        if (Pp <= 0) throw MalformedInput("period P must be positive");
        // verify the declared invariance spectrally
        double dy = 1.0 / static_cast<double>(Pp);
        double dz = static_cast<double>(Pprime) / static_cast<double>(nf.n);
        if ((nf.mu.shifted(dy, dz) - nf.mu).max_abs_coeff() > 1e-9 ||
            (nf.L2.shifted(dz) - nf.L2).max_abs_coeff() > 1e-9)
            throw IncompatibleNormalForm("(L, mu) not invariant under the declared period");
        // the x-lift P' y keeps the dy dz entry fixed (the bare z-translation
        // alone shifts it by -n dz Lambda = -P' Lambda)
        AffMap base = AffMap::compose(AffMap::flow_Y(dy, nf.n), AffMap::flow_Z(dz));
        return AffMap::compose(base, AffMap::x_shear_int(Pprime, 0));
    }
    if (kind == "chi" || kind == "chi_prime") {
        Rational r = require_rational_cert(nf.arith.Lcal_over_Lambda, "chi");
        double Lc = nf.Lcal();
        if (std::abs(Lc - r.value() * nf.Lambda) > 1e-9)
            throw VerificationFailed("Lcal certificate does not match the spectral value");
        if (nf.mu.depends_on_y(1e-10))
            throw IncompatibleNormalForm("chi requires mu independent of y");
        int q = static_cast<int>(r.q), p = static_cast<int>(r.p);
        AffMap chi = phi_lAB(nf, q, -p, 0);
        if (kind == "chi") return chi;
        // chi': the isometric correction
        if (nf.n == 0) {
            Rational kr = require_rational_cert(nf.arith.k_over_Lambda, "chi_prime");
            // smallest b >= 1 with (bq)(2k + bq Lcal) in 2 Lambda Z, i.e.
            // b q r_k / s_k + b^2 q p / 2 integral (k = (rk/sk) Lambda).
            long b = 0, B = 0;
            for (long cand = 1; cand <= 1000000; ++cand) {
                // value = cand*q*kr + cand^2*q*p/2 as an exact rational
                Rational v1(cand * q * kr.p, kr.q);
                Rational v2(cand * cand * q * p, 2);
                Rational sum(v1.p * v2.q + v2.p * v1.q, v1.q * v2.q);
                if (sum.q == 1) {
                    b = cand;
                    B = sum.p;
                    break;
                }
            }
            if (b == 0) throw VerificationFailed("chi_prime: no integral multiple found");
            AffMap chib = phi_lAB(nf, static_cast<int>(b) * q, -static_cast<int>(b) * p,
                                  -static_cast<int>(B));
            return chib;
        }
        // n != 0: compose with the Y-flow time that cancels the constant the
        // bare chi adds to the mu entry (read off the exact pullback).
        MetricSpec pulled = pullback_spec(nf.to_spec(), chi, Theta::rational(0, 1));
        double J = mean(pulled.mu) - mean(nf.mu);
        double s = -J / (2.0 * nf.n * nf.Lambda);
        return AffMap::compose(chi, AffMap::flow_Y(s, nf.n));
    }
    throw MalformedInput("unknown generator kind: " + kind);
}

AffMap make_generator_dio(const std::string& kind, const GeneratorParams& params,
                          const NormalFormDio& nf) {
    if (kind == "sigma") return AffMap::sigma();
    if (kind == "phi0") {
        if (nf.n == 0) throw IncompatibleNormalForm("phi0 requires n != 0");
        if (nf.mu.depends_on_z(1e-12))
            throw IncompatibleNormalForm("phi0 requires the mu = mu(y) form");
        if (std::abs(nf.k) > 1e-12) throw IncompatibleNormalForm("phi0 requires k = 0");
        return AffMap::phi0(nf.n, nf.theta.value());
    }
    if (kind == "flow_frame" || kind == "flowY")
        return AffMap::flow_frame(params.s, nf.n, nf.theta.value());
    if (kind == "flowZ") return AffMap::flow_Z(params.s);
    throw MalformedInput("unknown Diophantine-family generator kind: " + kind);
}

} // namespace lolight
