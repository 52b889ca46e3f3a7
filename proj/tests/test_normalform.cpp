#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lolight/curvature.hpp"
#include "lolight/normalform.hpp"

using namespace lolight;

namespace {
std::mt19937 rng(1618);
double urand() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// curvature correspondence: r_out(p) == r_in(change(p)) for reductions
template <class NF>
double r_correspondence(const MetricSpec& in, const Reduction<NF>& red, int grid = 12) {
    CurvatureEvaluator rin(in), rout(red.form.to_spec());
    double worst = 0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            Vec3 p{0, static_cast<double>(i) / grid, static_cast<double>(j) / grid};
            Vec3 q = red.change(p);
            worst = std::max(worst, std::abs(rout(p[1], p[2]) - rin(q[1], q[2])));
        }
    return worst;
}
} // namespace

TEST_CASE("straighten_slope") {
    Theta th = Theta::golden();
    // constant ceiling: zero shift, return time = the constant
    StraightenResult r0 = straighten_slope(Fn1::constant(1.0), th);
    CHECK(r0.return_time == doctest::Approx(1.0));
    CHECK(r0.shift.max_abs_coeff() < 1e-15);

    // ceiling 1 + 0.3 cos(2 pi z): conjugacy equation residual on a grid
    Fn1 c = Fn1::constant(1.0) + Fn1::harmonic(1, 0.3, 0.0);
    StraightenResult r = straighten_slope(c, th);
    CHECK(r.return_time == doctest::Approx(1.0));
    double worst = 0;
    for (int i = 0; i < 512; ++i) {
        double z = static_cast<double>(i) / 512;
        // new fiber coordinate t + psi(z): requires psi(R z) - psi(z) = mean - c
        worst = std::max(worst,
                         std::abs(r.shift(z + th.value()) - r.shift(z) + c(z) - r.return_time));
    }
    CHECK(worst < 1e-9);

    // resonant rational slope
    CHECK_THROWS_AS(straighten_slope(Fn1::constant(1.0) + Fn1::harmonic(3, 0.2, 0.0),
                                     Theta::rational(1, 3)),
                    ResonantFrequency);
}

TEST_CASE("reduce_diophantine: nu is killed, r preserved") {
    MetricSpec s = MetricSpec::flat(0, 1.0);
    s.theta = Theta::golden();
    s.nu = Fn2::harmonic(1, 1, 1.0, 0.0); // cos(2 pi (y+z)), mean 0
    s.mu = Fn2::harmonic(1, 0, 0.3, 0.0) + Fn2::constant(0.4);
    auto red = reduce_diophantine(s);
    CHECK(red.form.n == 0);
    CHECK(red.form.k == doctest::Approx(0.0)); // mean nu = 0
    CHECK(red.form.Lambda == doctest::Approx(1.0));
    CHECK(red.form.L == doctest::Approx(1.0));
    // the recorded change reproduces the output: r preserved pointwise
    CHECK(r_correspondence(s, red) < 1e-7);
    // and pulling the input back through the recorded map gives the form
    MetricSpec via = pullback_spec(s, red.change, red.form.theta);
    MetricSpec direct = red.form.to_spec();
    CHECK((via.nu - direct.nu).max_abs_coeff() < 1e-10);
    CHECK((via.mu - direct.mu).max_abs_coeff() < 1e-10);
    CHECK((via.L2 - direct.L2).max_abs_coeff() < 1e-10);
    CHECK(via.Lambda == doctest::Approx(direct.Lambda));
    // and the output is a fixed point (idempotence, exact tuple)
    auto red2 = reduce_diophantine(red.form.to_spec());
    CHECK(red2.form.k == doctest::Approx(red.form.k));
    CHECK((red2.form.mu - red.form.mu).max_abs_coeff() < 1e-12);
    CHECK(red2.change.is_identity(1e-10));

    // range normalization: k in [0, Lambda), fiber mean in [0, 2 Lambda)
    MetricSpec s2 = MetricSpec::flat(0, 1.0);
    s2.theta = Theta::golden();
    s2.nu = Fn2::constant(-0.3) + Fn2::harmonic(1, -1, 0.0, 0.5);
    s2.mu = Fn2::constant(-2.7) + Fn2::harmonic(1, 0, 0.0, 0.2);
    auto nf2 = reduce_diophantine(s2);
    CHECK(nf2.form.k >= 0.0);
    CHECK(nf2.form.k < 1.0);
    double fm = fiber_mean(nf2.form.mu, 'y').mean();
    CHECK(fm >= 0.0);
    CHECK(fm < 2.0);
    CHECK(r_correspondence(s2, nf2) < 1e-7);

    // n = 2 with nonzero fiber mean: flows kill k and the mean
    MetricSpec s3 = MetricSpec::flat(2, 1.0);
    s3.theta = Theta::golden();
    s3.nu = Fn2::constant(0.37);
    s3.mu = Fn2::constant(0.6) + Fn2::harmonic(1, 0, 0.5, 0.0);
    auto nf3 = reduce_diophantine(s3);
    CHECK(nf3.form.n == 2);
    CHECK(std::abs(nf3.form.k) < 1e-12);
    CHECK(std::abs(fiber_mean(nf3.form.mu, 'y').mean()) < 1e-12);
    CHECK(r_correspondence(s3, nf3) < 1e-7);

    // errors: rational slope, non-certified slope, non-constant L
    MetricSpec bad = s;
    bad.theta = Theta::rational(1, 3);
    CHECK_THROWS_AS(reduce_diophantine(bad), NonDiophantineSlope);
    bad.theta = Theta::declared(0.5773, false);
    CHECK_THROWS_AS(reduce_diophantine(bad), NonDiophantineSlope);
    bad.theta = Theta::golden();
    bad.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.5, 0.0));
    CHECK_THROWS_AS(reduce_diophantine(bad), NonConstantL);
}

TEST_CASE("reduce_closed: proof steps (i)-(iv)") {
    // nu(y,z) = cos(2 pi y) sin(2 pi z), L = 1, mu = 0, n = 0
    MetricSpec s = MetricSpec::flat(0, 1.0);
    s.nu = Fn2::harmonic(1, 1, 0.0, 0.5) + Fn2::harmonic(1, -1, 0.0, -0.5);
    auto red = reduce_closed(s);
    CHECK(red.form.k == doctest::Approx(0.0)); // fiber mean of nu is 0
    CHECK(r_correspondence(s, red) < 1e-7);
    // idempotence
    auto red2 = reduce_closed(red.form.to_spec());
    CHECK(red2.change.is_identity(1e-10));
    CHECK((red2.form.mu - red.form.mu).max_abs_coeff() < 1e-12);

    // z-dependent fiber mean of nu exercises the h(z)-shear, with L(z)
    MetricSpec sh = MetricSpec::flat(0, 1.0);
    sh.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0));
    sh.nu = Fn2::from_1d_z(Fn1::harmonic(1, 0.4, 0.0)); // N(z) nonconstant
    sh.mu = Fn2::harmonic(1, 0, 0.25, 0.0);
    auto redh = reduce_closed(sh);
    CHECK_NOTHROW(redh.form.validate());
    CHECK(r_correspondence(sh, redh) < 2e-7);
    CHECK(redh.composition_tail < 1e-9); // reprojection stayed spectral
    MetricSpec via = pullback_spec(sh, redh.change, Theta::rational(0, 1), 1e-9, 64);
    MetricSpec direct = redh.form.to_spec();
    CHECK((via.nu - direct.nu).max_abs_coeff() < 1e-8);
    CHECK((via.mu - direct.mu).max_abs_coeff() < 1e-8);

    // n = 1 with mu fiber mean 0.6: flows produce mean-zero mu and k = 0
    MetricSpec s4 = MetricSpec::flat(1, 1.0);
    s4.mu = Fn2::constant(0.6) + Fn2::harmonic(1, 0, 0.5, 0.0);
    s4.nu = Fn2::constant(0.2);
    auto red4 = reduce_closed(s4);
    CHECK(std::abs(red4.form.k) < 1e-12);
    CHECK(std::abs(fiber_mean(red4.form.mu, 'y').mean()) < 1e-12);
    CHECK(r_correspondence(s4, red4) < 1e-7);

    // rational theta = 1/2 is sheared to the theta = 0 chart first
    MetricSpec s5 = MetricSpec::flat(2, 1.0);
    s5.theta = Theta::rational(1, 2);
    s5.mu = Fn2::constant(0.3);
    auto red5 = reduce_closed(s5);
    CHECK(red5.form.n == 2);
    CHECK(std::abs(fiber_mean(red5.form.mu, 'y').mean()) < 1e-12);
    CHECK(r_correspondence(s5, red5) < 1e-7);
}

TEST_CASE("act_gl2: the proof formulas are the oracle (n = 0)") {
    // spec example: (a,b,c,d) = (1,1,0,1), theta golden, Lambda = L = 1,
    // k = 0, mu = 0 -> rho = 1 + theta; new Lambda = rho, L = 1/rho,
    // k = -1/rho range-normalized to exactly 1; mu entry becomes L^2 b^2 = 1.
    NormalFormDio nf;
    nf.theta = Theta::golden();
    auto out = act_gl2(nf, 1, 1, 0, 1);
    double rho = 1.0 + nf.theta.value();
    CHECK(out.Lambda == doctest::Approx(rho).epsilon(1e-12));
    CHECK(out.L == doctest::Approx(1.0 / rho).epsilon(1e-12));
    CHECK(out.k == doctest::Approx(1.0).epsilon(1e-12)); // {-1/rho}_rho = 1 exactly
    CHECK(out.theta.value() == doctest::Approx(nf.theta.value() / rho).epsilon(1e-12));
    CHECK(mean(out.mu) == doctest::Approx(1.0).epsilon(1e-12));

    // generic n = 0 check against the closed formulas (the mu mode (1,-1) is
    // chosen so the fiber-mean gauge stays trivial in both directions)
    NormalFormDio g;
    g.theta = Theta::golden();
    g.Lambda = 1.0;
    g.L = 1.2;
    g.k = 0.4;
    g.mu = Fn2::harmonic(1, -1, 0.2, 0.1) + Fn2::constant(0.9);
    long a = 2, b = 1, c = 1, d = 1;
    auto o = act_gl2(g, a, b, c, d);
    double th = g.theta.value();
    double r2 = a + b * th;
    double thp = (c + d * th) / r2;
    CHECK(o.theta.value() == doctest::Approx(thp).epsilon(1e-12));
    CHECK(o.Lambda == doctest::Approx(g.Lambda * r2).epsilon(1e-11));
    CHECK(o.L == doctest::Approx(g.L / std::abs(r2)).epsilon(1e-11));
    // k' = k - L^2 b / rho, then range-normalized mod (p + theta' q) Lambda'
    double kp = g.k - g.L * g.L * b / r2;
    bool k_matches = false;
    for (int p = -4; p <= 4 && !k_matches; ++p)
        for (int q = -4; q <= 4 && !k_matches; ++q)
            if (std::abs(o.k - kp - (p + thp * q) * o.Lambda) < 1e-9) k_matches = true;
    CHECK(k_matches);
    // mu transforms as mu'(u,v) rho^2 + ... : the y-active harmonics scale by
    // rho^2 and the gauge does not touch them; mode (1,-1) lands on (2,-3)
    Fn2 mut = g.mu.linear_substitution(d, -b, -c, a); // mu(du - bv, -cu + av)
    CHECK(o.mu.coeff_a(2, -3) == doctest::Approx(r2 * r2 * mut.coeff_a(2, -3)).epsilon(1e-10));
    CHECK(o.mu.coeff_b(2, -3) == doctest::Approx(r2 * r2 * mut.coeff_b(2, -3)).epsilon(1e-10));

    // inverse round trip: M then M^{-1} returns the original tuple, up to the
    // documented quotient (k-lattice and a torus translation of mu)
    auto back = act_gl2(o, d, -b, -c, a);
    CHECK(back.theta.value() == doctest::Approx(g.theta.value()).epsilon(1e-12));
    CHECK(back.Lambda == doctest::Approx(g.Lambda).epsilon(1e-11));
    CHECK(back.L == doctest::Approx(g.L).epsilon(1e-11));
    CHECK(back.k == doctest::Approx(g.k).epsilon(1e-9));
    CHECK(mean(back.mu) == doctest::Approx(mean(g.mu)).epsilon(1e-9));
    CHECK(std::hypot(back.mu.coeff_a(1, -1), back.mu.coeff_b(1, -1)) ==
          doctest::Approx(std::hypot(g.mu.coeff_a(1, -1), g.mu.coeff_b(1, -1)))
              .epsilon(1e-9));

    // identity acts trivially; non-unimodular rejected
    auto idm = act_gl2(g, 1, 0, 0, 1);
    CHECK(idm.k == doctest::Approx(g.k));
    CHECK_THROWS_AS(act_gl2(g, 2, 0, 0, 1), NonUnimodular);
}

TEST_CASE("act_gl2 with n != 0 preserves the form and the curvature class") {
    NormalFormDio nf;
    nf.n = 1;
    nf.theta = Theta::golden();
    nf.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
    auto out = act_gl2(nf, 1, 1, 0, 1);
    CHECK(out.n == 1);
    CHECK(std::abs(out.k) < 1e-12);
    CHECK(std::abs(fiber_mean(out.mu, 'y').mean()) < 1e-12);
    CHECK(out.Lambda > 0);
    // the two forms are isometric, so the integral of r^2 against the
    // parallel volume density Lambda L dy dz is equal
    auto r2_integral = [](const MetricSpec& s) {
        CurvatureEvaluator ev(s);
        double acc = 0;
        int G = 64;
        for (int i = 0; i < G; ++i)
            for (int j = 0; j < G; ++j) {
                double y = static_cast<double>(i) / G, z = static_cast<double>(j) / G;
                double r = ev(y, z);
                acc += r * r * s.Lambda * std::sqrt(s.L2(y, z));
            }
        return acc / (G * G);
    };
    CHECK(r2_integral(nf.to_spec()) ==
          doctest::Approx(r2_integral(out.to_spec())).epsilon(1e-8));
}

TEST_CASE("act_Z: the fractional-part formulas of the closed family") {
    // n=0, L=1 (Lcal=1), Lambda=1, k=0.25, l=1 -> k' = {1.25}_1 = 0.25,
    // mu shifted by {2*0.25 + 1}_2 = 1.5
    NormalFormClosed nf;
    nf.k = 0.25;
    nf.mu = Fn2::harmonic(1, 0, 0.3, 0.0) + Fn2::constant(0.2);
    auto out = act_Z(nf, 1);
    CHECK(out.k == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mean(out.mu) == doctest::Approx(fmod_range(0.2 + 1.5, 2.0)).epsilon(1e-12));
    // mu composes with y + l H(z) = y + z when L = 1
    Fn2 expect = nf.mu.linear_substitution(1, 1, 0, 1);
    CHECK(out.mu.coeff_a(1, 1) == doctest::Approx(expect.coeff_a(1, 1)).epsilon(1e-12));

    // l = 0 is the identity
    auto out0 = act_Z(nf, 0);
    CHECK(out0.k == nf.k);
    CHECK((out0.mu - nf.mu).max_abs_coeff() == 0.0);

    // composition property: act_Z(l1+l2) == act_Z(l1) . act_Z(l2) on tuples
    for (int t = 0; t < 4; ++t) {
        int l1 = static_cast<int>(urand() * 6) - 3;
        int l2 = static_cast<int>(urand() * 6) - 3;
        auto lhs = act_Z(nf, l1 + l2);
        auto rhs = act_Z(act_Z(nf, l2), l1);
        CHECK(lhs.k == doctest::Approx(rhs.k).epsilon(1e-10));
        CHECK((lhs.mu - rhs.mu).max_abs_coeff() < 1e-10);
        CHECK((lhs.L2 - rhs.L2).max_abs_coeff() < 1e-12);
    }

    // nonconstant L: the action survives with the spectral composition and
    // the curvature class is preserved
    NormalFormClosed nl;
    nl.Lambda = std::sqrt(3.0);
    nl.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    nl.k = 0.3;
    nl.mu = Fn2::from_1d_z(Fn1::harmonic(1, 0.2, 0.0)) + Fn2::constant(0.1);
    auto outl = act_Z(nl, 1);
    CHECK((outl.L2 - nl.L2).max_abs_coeff() < 1e-12);
    // k' = {k + l Lcal}_Lambda with Lcal = sqrt(3)
    CHECK(outl.k == doctest::Approx(fmod_range(0.3 + std::sqrt(3.0), nl.Lambda)).epsilon(1e-9));
    double r1 = curvature_r_sup(nl.to_spec(), 24);
    double r2 = curvature_r_sup(outl.to_spec(), 24);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-6));
}

TEST_CASE("are_isometric: Diophantine family") {
    NormalFormDio nf;
    nf.n = 2;
    nf.theta = Theta::golden();
    nf.mu = Fn2::harmonic(1, 0, 0.5, 0.0) + Fn2::harmonic(1, 1, 0.2, 0.0);

    // itself
    auto d0 = are_isometric(nf, nf);
    CHECK(d0.kind == IsometryDecision::Kind::isometric);

    // translated copy (discrete (1/n) Z^2 for n != 0)
    NormalFormDio tr = act_translation(nf, 0.5, 0.0);
    CHECK(are_isometric(nf, tr).kind == IsometryDecision::Kind::isometric);

    // L is an invariant of the n != 0 family
    NormalFormDio other = nf;
    other.L = 1.3;
    CHECK(are_isometric(nf, other).kind == IsometryDecision::Kind::not_isometric);

    // n = 0 continuous translations
    NormalFormDio a;
    a.theta = Theta::golden();
    a.k = 0.2;
    a.mu = Fn2::harmonic(1, 0, 0.4, 0.0) + Fn2::harmonic(1, 2, 0.0, 0.3) + Fn2::constant(0.5);
    NormalFormDio b = act_translation(a, 0.137, 0.731);
    CHECK(are_isometric(a, b).kind == IsometryDecision::Kind::isometric);
    NormalFormDio c = a;
    c.mu = a.mu + Fn2::harmonic(1, -1, 0.2, 0.0);
    auto dc = are_isometric(a, c, {.m_max = 2});
    CHECK(dc.kind != IsometryDecision::Kind::isometric);

    // a genuine GL2 witness: the image under (1,1,0,1) must be recognized
    NormalFormDio g2 = act_gl2(a, 1, 1, 0, 1);
    auto dg = are_isometric(a, g2, {.m_max = 2});
    CHECK(dg.kind == IsometryDecision::Kind::isometric);
    CHECK(dg.witness.find("gl2") != std::string::npos);
}

TEST_CASE("are_isometric: closed family and the act_Z witness") {
    NormalFormClosed nf;
    nf.Lambda = 1.0;
    nf.k = 0.25;
    nf.mu = Fn2::harmonic(1, 0, 0.3, 0.0) + Fn2::harmonic(1, 2, 0.1, 0.0) + Fn2::constant(0.2);

    CHECK(are_isometric(nf, nf).kind == IsometryDecision::Kind::isometric);

    // act_Z image is isometric (witness ell = -1)
    auto img = act_Z(nf, 1);
    auto dec = are_isometric(nf, img);
    CHECK(dec.kind == IsometryDecision::Kind::isometric);

    // different Lcal: not isometric
    NormalFormClosed g = nf;
    g.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    CHECK(are_isometric(nf, g).kind == IsometryDecision::Kind::not_isometric);

    // translated copy
    auto tr = act_translation(nf, 0.31, 0.12);
    CHECK(are_isometric(nf, tr).kind == IsometryDecision::Kind::isometric);

    // genuinely different mu: undecided within bounds (never claimed distinct)
    NormalFormClosed h = nf;
    h.mu = nf.mu + Fn2::harmonic(2, 1, 0.15, 0.0);
    auto dh = are_isometric(nf, h, {.ell_max = 2});
    CHECK(dh.kind == IsometryDecision::Kind::undecided);
}
