#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lolight/curvature.hpp"
#include "lolight/transforms.hpp"

using namespace lolight;

namespace {
std::mt19937 rng(90210);
double urand() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

NormalFormClosed case9_form() {
    NormalFormClosed nf;
    nf.n = 2;
    nf.Lambda = 1.0;
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    return nf;
}

NormalFormClosed case7_form() {
    NormalFormClosed nf;
    nf.n = 0;
    nf.Lambda = 1.0;
    nf.L2 = Fn1::constant(1.0);
    nf.k = std::sqrt(2.0) - 1.0;
    nf.mu = Fn2::constant(0.5);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
    nf.arith.k_over_Lambda = {CertValue::Kind::irrational, Rational()};
    return nf;
}
} // namespace

TEST_CASE("AffMap evaluation, differential, composition") {
    AffMap f = AffMap::flow_Y(0.3, 2);
    Vec3 p{0.1, 0.2, 0.5};
    Vec3 q = f(p);
    CHECK(q[0] == doctest::Approx(0.1 + 0.3 * 2 * 0.5));
    CHECK(q[1] == doctest::Approx(0.5));
    CHECK(q[2] == doctest::Approx(0.5));

    // differential against finite differences, for a map with every feature
    AffMap g;
    g.s1 = -1;
    g.m11 = 1;
    g.m12 = -2;
    g.sy = Fn1::harmonic(2, 0.1, -0.3);
    g.ty = 0.7;
    g.xs.Ay = 2;
    g.xs.qzz = 1.5;
    g.xs.qyz = -0.5;
    g.xs.py = Fn1::harmonic(1, 0.2, 0.0);
    g.xs.p1 = Fn1::harmonic(1, 0.0, 0.4);
    g.xs.f2 = Fn2::harmonic(1, -1, 0.3, 0.2);
    Mat3 J = g.differential(p);
    double h = 1e-6;
    for (int c = 1; c < 3; ++c) {
        Vec3 pp = p, pm = p;
        pp[c] += h;
        pm[c] -= h;
        Vec3 d = g(pp), e = g(pm);
        for (int i = 0; i < 3; ++i)
            CHECK(J(i, c) == doctest::Approx((d[i] - e[i]) / (2 * h)).epsilon(1e-6));
    }

    // compose = pointwise composition
    AffMap gf = AffMap::compose(g, f);
    for (int t = 0; t < 10; ++t) {
        Vec3 x{urand(), urand(), urand()};
        Vec3 lhs = gf(x), rhs = g(f(x));
        CHECK(max_abs({lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]}) < 1e-12);
    }
    AffMap fg = AffMap::compose(f, g);
    for (int t = 0; t < 10; ++t) {
        Vec3 x{urand(), urand(), urand()};
        Vec3 lhs = fg(x), rhs = f(g(x));
        CHECK(max_abs({lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]}) < 1e-12);
    }

    // gl2 composition with polynomial shears stays exact
    AffMap m1 = AffMap::gl2_normalizer(1, 1, 0, 1, 2);
    AffMap m2 = AffMap::gl2_normalizer(2, 1, 1, 1, 2);
    AffMap m12 = AffMap::compose(m1, m2);
    for (int t = 0; t < 10; ++t) {
        Vec3 x{urand(), urand(), urand()};
        Vec3 lhs = m12(x), rhs = m1(m2(x));
        CHECK(max_abs({lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]}) < 1e-10);
    }
}

TEST_CASE("normalizes_lattice") {
    // sigma normalizes every Gamma_n
    CHECK(normalizes_lattice(AffMap::sigma(), Lattice::gamma(0)));
    CHECK(normalizes_lattice(AffMap::sigma(), Lattice::gamma(3)));
    CHECK(normalizes_lattice(AffMap::sigma(), Lattice::gamma(2, 0.25, 0.75)));

    // (x + beta z, y, z) with beta not an integer does not normalize Gamma_0
    AffMap bad;
    bad.xs.Bz = 0.37;
    CHECK(!normalizes_lattice(bad, Lattice::gamma(0)));

    // lattice translations themselves normalize
    CHECK(normalizes_lattice(AffMap::translation(1, 0, 0), Lattice::gamma(2)));
    {
        AffMap tz = AffMap::translation(0.0, 0, 1);
        tz.xs.Ay = 2;
        CHECK(normalizes_lattice(tz, Lattice::gamma(2)));
    }

    // flows of Gamma_n-invariant fields normalize
    CHECK(normalizes_lattice(AffMap::flow_Y(0.371, 2), Lattice::gamma(2)));
    CHECK(normalizes_lattice(AffMap::flow_frame(1.3, 2, 0.618), Lattice::gamma(2)));
    CHECK(normalizes_lattice(AffMap::phi0(2, 0.618), Lattice::gamma(2)));
    CHECK(!normalizes_lattice(AffMap::flow_Y(0.3, 1), Lattice::gamma(2))); // wrong n

    // gl2 normalizers do; the bare linear map without the shear does not (n>0)
    CHECK(normalizes_lattice(AffMap::gl2_normalizer(1, 1, 0, 1, 2), Lattice::gamma(2)));
    CHECK(normalizes_lattice(AffMap::gl2_normalizer(2, 1, 1, 1, 3), Lattice::gamma(3)));
    {
        AffMap lin;
        lin.m11 = 1;
        lin.m12 = 1; // (y+z, z) without the x-correction
        CHECK(normalizes_lattice(lin, Lattice::gamma(0)));
        CHECK(!normalizes_lattice(lin, Lattice::gamma(2)));
    }

    // torus lattices: translations in, sigma out
    Lattice ta = Lattice::torusA(std::sqrt(2.0), 0.25, 0.5);
    CHECK(normalizes_lattice(AffMap::translation(0.3, 0.9, 0), ta));
    CHECK(normalizes_lattice(AffMap::translation(1 + 0.25, std::sqrt(2.0) + 0.5, 1), ta));
    CHECK(!normalizes_lattice(AffMap::sigma(), ta));
    Lattice tb = Lattice::torusB(std::sqrt(3.0), 0.1, 0.2);
    CHECK(normalizes_lattice(AffMap::translation(0.4, 0, 0.8), tb));
    CHECK(!normalizes_lattice(AffMap::sigma(), tb));

    // phi_lAB normalizes Gamma_n (nontrivial H, eta, quadratic shear)
    NormalFormClosed nf = case9_form();
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
    AffMap phi = phi_lAB(nf, 2, -3, 1);
    CHECK(normalizes_lattice(phi, Lattice::gamma(2)));
    CHECK(!normalizes_lattice(phi, Lattice::gamma(3)));
}

TEST_CASE("pullback and affine defect: sigma on closed-leaf forms") {
    // sigma on any closed-leaf normal form: phi^*g = g + 2 Lambda dz^2,
    // i.e. C = 2 / Lambda (the grid oracle is authoritative; published
    // conventions also quote 1/Lambda and 2 Lambda -- see README notes).
    for (double La : {1.0, 2.0}) {
        NormalFormClosed nf = case9_form();
        nf.Lambda = La;
        nf.mu = Fn2::harmonic(1, 0, 0.4, 0.0) + Fn2::harmonic(1, 1, 0.0, 0.2);
        MetricSpec s = nf.to_spec();
        AffineDefect d = affine_defect(s, AffMap::sigma(), 16);
        CHECK(d.C == doctest::Approx(2.0 / La).epsilon(1e-10));
        CHECK(d.residual < 1e-10);
        CHECK(d.C_spread < 1e-10);
        CHECK(d.lambda == 1.0);
    }

    // identity map: C = 0, residual 0
    AffineDefect id = affine_defect(case9_form().to_spec(), AffMap::identity(), 8);
    CHECK(id.C == 0.0);
    CHECK(id.residual == 0.0);

    // isometric lattice translation: pullback equals g
    MetricSpec s = case9_form().to_spec();
    auto grid = pullback(s, AffMap::translation(1, 0, 0), 8);
    MetricField f = coords_field(s);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK((grid[i * 8 + j] - f({0, i / 8.0, j / 8.0})).max_abs() < 1e-12);
}

TEST_CASE("decompose_E and Christoffel invariance of the defect direction") {
    NormalFormClosed nf = case9_form();
    nf.mu = Fn2::harmonic(1, 0, 0.4, 0.0);
    MetricSpec s = nf.to_spec();

    auto [E, N] = decompose_E(s, AffMap::sigma(), {0, 0.3, 0.7});
    // N^2 = 0 and N = C g(., X) X: single entry C * Lambda in the x-row
    CHECK((N * N).max_abs() < 1e-10);
    double C = 2.0 / nf.Lambda;
    // g(., X) = Lambda dz, so N = C Lambda (dz otimes d_x)
    CHECK(N(0, 2) == doctest::Approx(C * nf.Lambda));
    CHECK(std::abs(N(1, 1)) + std::abs(N(2, 2)) + std::abs(N(1, 2)) < 1e-10);

    // isometry: E = Id
    auto [Ei, Ni] = decompose_E(s, AffMap::translation(0.5, 0, 0), {0, 0.1, 0.2});
    CHECK((Ei - Mat3::identity()).max_abs() < 1e-12);
    CHECK(Ni.max_abs() < 1e-12);

    // g and g + C Xb(x)Xb share their Christoffels
    MetricSpec s2 = s;
    s2.mu = s.mu + Fn2::constant(0.37 * nf.Lambda * nf.Lambda);
    for (int t = 0; t < 4; ++t) {
        Vec3 p{0, urand(), urand()};
        Christoffels A = christoffels(s, p), B = christoffels(s2, p);
        for (int i = 0; i < 3; ++i) CHECK((A[i] - B[i]).max_abs() < 1e-8);
    }

    // r-invariance under sigma; and a deliberately non-affine map fails
    CHECK(check_r_invariance(s, AffMap::sigma()) < 1e-7);
    AffMap warp;
    warp.sy = Fn1::harmonic(1, 0.0, 0.3);
    CHECK(check_r_invariance(s, warp) > 1e-3);
}

TEST_CASE("defect additivity and flow linearity") {
    NormalFormClosed nf = case9_form();
    MetricSpec s = nf.to_spec();
    // C(Phi_Y^s) = 2 n s / Lambda, linear in s
    for (double t : {0.1, 0.2, 0.4}) {
        AffineDefect d = affine_defect(s, AffMap::flow_Y(t, nf.n), 12);
        CHECK(d.C == doctest::Approx(2.0 * nf.n * t / nf.Lambda).epsilon(1e-9));
        CHECK(d.residual < 1e-9);
    }
    // additivity over random pairs of generators
    for (int t = 0; t < 5; ++t) {
        AffMap a = AffMap::flow_Y(urand(), nf.n);
        AffMap b = (t % 2 == 0) ? AffMap::sigma() : AffMap::flow_Z(0.5 * urand());
        AffineDefect da = affine_defect(s, a, 10);
        AffineDefect db = affine_defect(s, b, 10);
        AffineDefect dab = affine_defect(s, AffMap::compose(a, b), 10);
        CHECK(dab.C == doctest::Approx(da.C + db.C).epsilon(1e-9));
    }
}

TEST_CASE("pullback functoriality") {
    NormalFormClosed nf = case9_form();
    nf.mu = Fn2::harmonic(2, -1, 0.15, 0.0);
    MetricSpec s = nf.to_spec();
    AffMap a = AffMap::flow_Y(0.37, nf.n);
    AffMap b = AffMap::sigma();
    AffMap ab = AffMap::compose(a, b);
    // (a o b)^* g at p == b^* (a^* g): check pointwise via the Jacobians
    MetricField f = coords_field(s);
    for (int t = 0; t < 10; ++t) {
        Vec3 p{0, urand(), urand()};
        Mat3 Jb = b.differential(p);
        Mat3 Ja = a.differential(b(p));
        Mat3 two_step = Jb.transposed() * (Ja.transposed() * f(a(b(p))) * Ja) * Jb;
        Mat3 Jab = ab.differential(p);
        Mat3 one_step = Jab.transposed() * f(ab(p)) * Jab;
        CHECK((two_step - one_step).max_abs() < 1e-10);
    }
}

TEST_CASE("pullback_spec: flows reproduce the proof formulas") {
    // Diophantine family, n != 0: Phi_U^s sends k to k + theta n s Lambda and
    // mu to mu(y+s, z) + 2 n s Lambda
    MetricSpec s = MetricSpec::flat(2, 1.0);
    s.theta = Theta::golden();
    s.nu = Fn2::constant(0.25);
    s.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
    double sflow = 0.31;
    MetricSpec out = pullback_spec(s, AffMap::flow_Y(sflow, 2), s.theta);
    double th = s.theta.value();
    CHECK(out.Lambda == doctest::Approx(1.0));
    CHECK(out.nu.is_constant(1e-12));
    CHECK(mean(out.nu) == doctest::Approx(0.25 + th * 2 * sflow).epsilon(1e-12));
    Fn2 expect_mu = s.mu.shifted(sflow, 0.0) + 2.0 * 2 * sflow;
    CHECK((out.mu - expect_mu).max_abs_coeff() < 1e-12);
    CHECK((out.L2 - s.L2).max_abs_coeff() < 1e-12);

    // Phi_Z^t sends k to k - n t Lambda and shifts mu in z
    MetricSpec out2 = pullback_spec(s, AffMap::flow_Z(0.2), s.theta);
    CHECK(mean(out2.nu) == doctest::Approx(0.25 - 2 * 0.2).epsilon(1e-12));

    // integer lift x -> x + p y + q z: k += (p + theta q) Lambda, mu += 2 q Lambda
    MetricSpec out3 = pullback_spec(s, AffMap::x_shear_int(3, -2), s.theta);
    CHECK(mean(out3.nu) == doctest::Approx(0.25 + (3 - 2 * th)).epsilon(1e-12));
    CHECK(mean(out3.mu) == doctest::Approx(mean(s.mu) - 4.0).epsilon(1e-12));

    // sigma adds 2 Lambda to mu in the theta = 0 chart
    MetricSpec c = MetricSpec::flat(1, 1.5);
    c.mu = Fn2::harmonic(1, 0, 0.3, 0.0);
    MetricSpec outc = pullback_spec(c, AffMap::sigma(), c.theta);
    CHECK((outc.mu - (c.mu + Fn2::constant(2.0 * 1.5))).max_abs_coeff() < 1e-12);

    // a non-normalizing map is rejected
    AffMap bad;
    bad.sy = Fn1::harmonic(1, 0.2, 0.0);
    CHECK_THROWS_AS(pullback_spec(c, bad, c.theta), VerificationFailed);
}

TEST_CASE("generators: chi and chi_prime on certified forms") {
    // Lcal = Lambda exactly for L^2 = 2 + sin(2 pi z), Lambda = sqrt(3)
    NormalFormClosed nf;
    nf.n = 0;
    nf.Lambda = std::sqrt(3.0);
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    nf.k = nf.Lambda / 3.0;
    nf.mu = Fn2::constant(0.7);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
    nf.arith.k_over_Lambda = {CertValue::Kind::rational, Rational(1, 3)};
    CHECK(nf.Lcal() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

    AffMap chi = make_generator("chi", {}, nf);
    MetricSpec s = nf.to_spec();
    CHECK(normalizes_lattice(chi, s.lattice));
    AffineDefect d = affine_defect(s, chi, 16);
    CHECK(d.residual < 1e-8);
    CHECK(d.C_spread < 1e-8);
    CHECK(std::abs(d.C) > 1e-6); // affine, not isometric
    auto [E, N] = decompose_E(s, chi, {0, 0.22, 0.81});
    CHECK((N * N).max_abs() < 1e-8);
    CHECK(check_r_invariance(s, chi) < 1e-7);

    // chi' is an isometry witness: C = 0
    AffMap chip = make_generator("chi_prime", {}, nf);
    CHECK(normalizes_lattice(chip, s.lattice));
    AffineDefect dp = affine_defect(s, chip, 16);
    CHECK(std::abs(dp.C) < 1e-8);
    CHECK(dp.residual < 1e-8);

    // missing certificate
    NormalFormClosed nocert = nf;
    nocert.arith.Lcal_over_Lambda.kind = CertValue::Kind::absent;
    CHECK_THROWS_AS(make_generator("chi", {}, nocert), CertificateMissing);
    NormalFormClosed lie = nf;
    lie.arith.Lcal_over_Lambda.value = Rational(1, 2);
    CHECK_THROWS_AS(make_generator("chi", {}, lie), VerificationFailed);
}

TEST_CASE("generators: psi on a declared-period form; phi0; case-8 flow") {
    // case 5 shape: n = 2, period (P, P') = (2, 1)
    NormalFormClosed nf;
    nf.n = 2;
    nf.Lambda = 1.0;
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(2, 0.4, 0.0); // period 1/2 in z
    nf.mu = Fn2::harmonic(2, -2, 0.3, 0.0);                  // invariant under psi-bar
    nf.arith.period = std::make_pair(2, 1);
    AffMap psi = make_generator("psi", {}, nf);
    MetricSpec s = nf.to_spec();
    CHECK(normalizes_lattice(psi, s.lattice));
    AffineDefect d = affine_defect(s, psi, 16);
    CHECK(d.residual < 1e-8);
    CHECK(d.C == doctest::Approx(2.0 * nf.n / (2.0 * nf.Lambda)).epsilon(1e-8));
    CHECK(check_r_invariance(s, psi) < 1e-7);

    // undeclared period
    NormalFormClosed noper = nf;
    noper.arith.period.reset();
    CHECK_THROWS_AS(make_generator("psi", {}, noper), CertificateMissing);
    // declared but wrong period
    NormalFormClosed wrong = nf;
    wrong.arith.period = std::make_pair(3, 1);
    CHECK_THROWS_AS(make_generator("psi", {}, wrong), IncompatibleNormalForm);

    // phi0 on a case-3 Diophantine form
    NormalFormDio d3;
    d3.n = 2;
    d3.theta = Theta::golden();
    d3.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
    AffMap phi0 = make_generator_dio("phi0", {}, d3);
    MetricSpec s3 = d3.to_spec();
    CHECK(normalizes_lattice(phi0, s3.lattice));
    AffineDefect d0 = affine_defect(s3, phi0, 16);
    CHECK(d0.residual < 1e-9);
    CHECK(d0.C == doctest::Approx(2.0 / d3.Lambda).epsilon(1e-9));
    CHECK(check_r_invariance(s3, phi0) < 1e-7);

    // case-8 flow of Y + theta d_z on the flat form
    NormalFormDio d8;
    d8.n = 1;
    d8.theta = Theta::golden();
    AffMap fl = make_generator_dio("flow_frame", {.s = 0.8}, d8);
    MetricSpec s8 = d8.to_spec();
    CHECK(normalizes_lattice(fl, s8.lattice));
    AffineDefect df = affine_defect(s8, fl, 12);
    CHECK(df.C == doctest::Approx(2.0 * 0.8 * 1 / d8.Lambda).epsilon(1e-9));
    CHECK(df.residual < 1e-9);
}

TEST_CASE("sigma on case-7 form and the C(sigma^k) = k C(sigma) morphism") {
    MetricSpec s = case7_form().to_spec();
    AffineDefect d1 = affine_defect(s, AffMap::sigma(), 12);
    CHECK(d1.C == doctest::Approx(2.0).epsilon(1e-10));
    for (int k = 2; k <= 4; ++k) {
        AffineDefect dk = affine_defect(s, pow(AffMap::sigma(), k), 12);
        CHECK(dk.C == doctest::Approx(k * d1.C).epsilon(1e-9));
    }
}
