#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lolight/model.hpp"
#include "lolight/curvature.hpp"

using namespace lolight;

namespace {
std::mt19937 rng(777);
double urand() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
} // namespace

TEST_CASE("metric_frame") {
    MetricSpec flat = MetricSpec::flat(0, 1.0);
    Mat3 g = metric_frame(flat, {0, 0, 0});
    CHECK(g(0, 2) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(2, 2) == 0.0);
    CHECK(g(0, 0) == 0.0);

    MetricSpec s = MetricSpec::flat(0, 2.0);
    s.mu = Fn2::harmonic(1, 0, 1.0, 0.0); // cos(2 pi y)
    Mat3 m = metric_frame(s, {0, 0, 0.3});
    CHECK(m(0, 2) == 2.0);
    CHECK(m(1, 1) == 1.0);
    CHECK(m(2, 2) == doctest::Approx(1.0));
    // periodicity
    Mat3 m1 = metric_frame(s, {0, 1.3, 0.4});
    Mat3 m2 = metric_frame(s, {0, 0.3, 0.4});
    CHECK((m1 - m2).max_abs() < 1e-12);

    CHECK(signature_is_lorentzian(s));
}

TEST_CASE("metric_coords: frame change and determinant identity") {
    // n = 0, theta = 0: coordinate matrix equals the frame matrix
    MetricSpec flat = MetricSpec::flat(0, 1.0);
    CoordMetric cm = metric_coords(flat);
    Mat3 c = cm.eval(0.2, 0.7);
    CHECK((c - metric_frame(flat, {0, 0.2, 0.7})).max_abs() < 1e-14);

    // n = 1, theta = 0 flat: det = -Lambda^2 L^2 on random points
    MetricSpec s1 = MetricSpec::flat(1, 1.0);
    CoordMetric cm1 = metric_coords(s1);
    for (int t = 0; t < 16; ++t) {
        double y = urand() * 2 - 1, z = urand() * 2 - 1;
        CHECK(cm1.eval(y, z).det() == doctest::Approx(-1.0).epsilon(1e-12));
    }

    // n = 0, theta = 1/2 flat: hand frame inversion
    MetricSpec s2 = MetricSpec::flat(0, 1.0);
    s2.theta = Theta::rational(1, 2);
    Mat3 c2 = metric_coords(s2).eval(0.1, 0.9);
    double th = 0.5;
    // g_xy = -theta Lambda; g_yy = L^2 + theta^2 mu - 2 theta nu = 1 + 0;
    // g_yz = nu - theta mu = 0; g_zz = mu = 0
    CHECK(c2(0, 1) == doctest::Approx(-th));
    CHECK(c2(1, 1) == doctest::Approx(1.0));
    CHECK(c2(1, 2) == doctest::Approx(0.0));
    CHECK(c2(0, 2) == doctest::Approx(1.0));

    // generic spec: determinant identity with all fields on
    MetricSpec s3 = MetricSpec::flat(2, 1.5);
    s3.theta = Theta::golden();
    s3.L2 = Fn2::constant(1.0) + Fn2::harmonic(1, 1, 0.2, 0.0);
    s3.nu = Fn2::harmonic(1, 0, 0.0, 0.3);
    s3.mu = Fn2::harmonic(0, 1, 0.4, 0.0);
    CoordMetric cm3 = metric_coords(s3);
    for (int t = 0; t < 16; ++t) {
        double y = urand() * 3 - 1, z = urand() * 3 - 1;
        double expect = -s3.Lambda * s3.Lambda * s3.L2(y, z);
        CHECK(cm3.eval(y, z).det() == doctest::Approx(expect).epsilon(1e-11));
    }
}

TEST_CASE("lattice actions") {
    Lattice g2 = Lattice::gamma(2);
    Vec3 p = lattice_action(g2, {3}, {0, 1, 0}); // tau_{z,2}
    CHECK(p[0] == doctest::Approx(2.0));
    CHECK(p[1] == doctest::Approx(1.0));
    CHECK(p[2] == doctest::Approx(1.0));

    CHECK(max_abs(lattice_action(g2, {}, {0.3, 0.4, 0.5})) ==
          doctest::Approx(0.5)); // identity word fixes the point

    Lattice ta = Lattice::torusA(std::sqrt(2.0), 0.25, 0.5);
    Vec3 q = lattice_action(ta, {1}, {0, 0, 0});
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(q[2] == doctest::Approx(0.0));

    // group relation: in Gamma_0 all generators commute
    Lattice g0 = Lattice::gamma(0);
    Vec3 a = lattice_action(g0, {1, 2, 3}, {0.1, 0.2, 0.3});
    Vec3 b = lattice_action(g0, {3, 2, 1}, {0.1, 0.2, 0.3});
    CHECK(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]) < 1e-14);
    // and words with inverses cancel
    Vec3 c = lattice_action(g2, {3, 1, -3, -1}, {0.7, 0.1, 0.9});
    CHECK(std::abs(c[0] - 0.7) + std::abs(c[1] - 0.1) + std::abs(c[2] - 0.9) < 1e-14);
}

TEST_CASE("check_invariance") {
    MetricSpec s = MetricSpec::flat(1, 1.0);
    s.L2 = Fn2::constant(2.0) + Fn2::harmonic(0, 1, 0.0, 1.0);
    s.mu = Fn2::harmonic(1, 1, 0.3, 0.1);
    CHECK(check_invariance(s) < 1e-10);
    CHECK(check_invariance(MetricSpec::flat(0)) == doctest::Approx(0.0));

    // deliberate violation: z-aperiodic mu injected via a raw field override
    MetricField bad = [&](const Vec3& p) {
        Mat3 m;
        m(0, 2) = m(2, 0) = 1.0;
        m(1, 1) = 1.0;
        m(2, 2) = 0.1 * p[2]; // not 1-periodic in z
        return m;
    };
    CHECK(check_invariance(bad, Lattice::gamma(0)) > 0.01);

    // torus lattices
    MetricSpec ta;
    ta.lattice = Lattice::torusA(std::sqrt(2.0), 0.0, 0.0);
    ta.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.5, 0.0));
    ta.validate();
    CHECK(check_invariance(ta) < 1e-12);
}

TEST_CASE("metric_from_connection") {
    // a = b = 0: flat spec with n = 0
    ConnectionData cd0;
    MetricSpec s0 = metric_from_connection(cd0);
    CHECK(s0.n() == 0);
    CHECK(s0.Lambda == 1.0);
    CHECK(s0.L2.mean() == doctest::Approx(1.0));
    CHECK(s0.nu.max_abs_coeff() == 0.0);

    // a = 0, b = 3: C = 3, default n = 3, Lambda = 1
    ConnectionData cd1;
    cd1.b = Fn2::constant(3.0);
    cd1.theta = Theta::golden();
    MetricSpec s1 = metric_from_connection(cd1);
    CHECK(s1.n() == 3);
    CHECK(s1.Lambda == doctest::Approx(1.0));
    CHECK(s1.nu.max_abs_coeff() == 0.0);
    CHECK(s1.mu.max_abs_coeff() == 0.0);
    // round trip through the induced connection
    ConnectionData back1 = connection_of(s1);
    CHECK((back1.b - cd1.b).max_abs_coeff() < 1e-12);

    // explicit n choice
    MetricSpec s1b = metric_from_connection(cd1, {.n_choice = 6, .max_freq = 16});
    CHECK(s1b.n() == 6);
    CHECK(s1b.Lambda == doctest::Approx(0.5));

    // generic pair: a = 0.1 cos(2 pi v), b = cos(2 pi w)
    ConnectionData cd2;
    cd2.a = Fn2::harmonic(1, 0, 0.1, 0.0);
    cd2.b = Fn2::harmonic(0, 1, 1.0, 0.0);
    cd2.theta = Theta::golden();
    MetricSpec s2 = metric_from_connection(cd2);
    CHECK(s2.n() == 0);
    ConnectionData back2 = connection_of(s2);
    double worst = 0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            double v = i / 32.0, w = j / 32.0;
            worst = std::max(worst, std::abs(back2.b(v, w) - cd2.b(v, w)));
            // a is recovered up to an additive constant (gauge)
            double da = (back2.a(v, w) - mean(back2.a)) - (cd2.a(v, w) - mean(cd2.a));
            worst = std::max(worst, std::abs(da));
        }
    CHECK(worst < 1e-9);
}

TEST_CASE("tangent vectors pair through the coordinate metric") {
    MetricSpec s = MetricSpec::flat(1, 1.5);
    TangentVector u{{0.0, 0.2, 0.7}, {1.0, 0.0, 0.0}}; // d_x
    TangentVector v{{0.0, 0.2, 0.7}, {0.0, 0.0, 1.0}}; // d_z
    CHECK(metric_pairing(s, u, v) == doctest::Approx(1.5)); // g(d_x, d_z) = Lambda
    CHECK(metric_pairing(s, u, u) == doctest::Approx(0.0)); // d_x lightlike
    TangentVector w{{0.0, 0.9, 0.7}, {0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(metric_pairing(s, u, w), MalformedInput);
}

TEST_CASE("validation rejects bad specs") {
    MetricSpec s = MetricSpec::flat(0);
    s.L2 = Fn2::constant(-1.0);
    CHECK_THROWS_AS(s.validate(), MalformedInput);

    MetricSpec ta;
    ta.lattice = Lattice::torusA(std::sqrt(2.0), 0, 0);
    ta.mu = Fn2::harmonic(1, 0, 0.5, 0.0); // torusA forbids mu
    CHECK_THROWS_AS(ta.validate(), MalformedInput);
}
