#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lolight/classify.hpp"
#include "lolight/curvature.hpp"
#include "lolight/deform.hpp"

using namespace lolight;

namespace {

MetricSpec torusA_spec() {
    MetricSpec s;
    s.lattice = Lattice::torusA(std::sqrt(2.0) - 1.0, 0.25, 0.0);
    s.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.3, 0.0));
    return s;
}

NormalFormClosed case6_form() {
    NormalFormClosed nf;
    nf.Lambda = std::sqrt(3.0);
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0); // Lcal = sqrt(3)
    nf.k = nf.Lambda / 3.0;
    nf.mu = Fn2::constant(0.7);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
    nf.arith.k_over_Lambda = {CertValue::Kind::rational, Rational(1, 3)};
    return nf;
}

NormalFormClosed case7_form() {
    // nonconstant L keeps the metric non-flat; Lcal = sqrt(3) = Lambda
    NormalFormClosed nf;
    nf.Lambda = std::sqrt(3.0);
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    nf.k = (std::sqrt(2.0) - 1.0) * nf.Lambda;
    nf.mu = Fn2::constant(0.5);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
    nf.arith.k_over_Lambda = {CertValue::Kind::irrational, Rational()};
    return nf;
}

} // namespace

TEST_CASE("cases 1a / 1b: tori with trivial affine quotient") {
    ClassReport a = classify(torusA_spec());
    CHECK(a.table1_row == 'a');
    CHECK(a.table2_case == 1);
    CHECK(a.group == "trivial");
    CHECK(a.isom_compact == Tribool::yes);
    REQUIRE(a.generators.size() == 1);
    CHECK(std::abs(a.generators[0].C) < 1e-10);
    CHECK(a.generators[0].residual < 1e-10);

    MetricSpec b;
    b.lattice = Lattice::torusB(std::sqrt(3.0) - 1.0, 0.0, 0.5);
    b.mu = Fn2::from_1d_y(Fn1::harmonic(1, 0.4, 0.0));
    ClassReport rb = classify(b);
    CHECK(rb.table1_row == 'b');
    CHECK(rb.table2_case == 1);
}

TEST_CASE("case 2: generic Diophantine slope") {
    NormalFormDio nf;
    nf.n = 1;
    nf.theta = Theta::golden();
    nf.mu = Fn2::harmonic(1, 1, 0.3, 0.0); // depends on y and z
    ClassReport r = classify(nf);
    CHECK(r.table1_row == 'c');
    CHECK(r.table2_case == 2);
    CHECK(r.group == "trivial");
    CHECK(!r.flat);
    CHECK(r.isom_compact == Tribool::yes);
}

TEST_CASE("case 3: mu(y) on a parabolic torus with irrational slope") {
    NormalFormDio nf;
    nf.n = 2;
    nf.theta = Theta::golden();
    nf.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
    ClassReport r = classify(nf);
    CHECK(r.table2_case == 3);
    CHECK(r.group == "Z");
    REQUIRE(r.generators.size() == 1);
    CHECK(r.generators[0].kind == "phi0");
    CHECK(r.generators[0].normalizes);
    CHECK(r.generators[0].residual < 1e-8);
    CHECK(r.generators[0].N_squared < 1e-8);
    CHECK(r.generators[0].r_invariance < 1e-7);
    CHECK(r.generators[0].C == doctest::Approx(2.0 / nf.Lambda).epsilon(1e-8));
}

TEST_CASE("case 4: closed leaves without extra structure") {
    NormalFormClosed nf;
    nf.n = 1;
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 0.3);
    nf.mu = Fn2::harmonic(1, 1, 0.2, 0.0) + Fn2::harmonic(1, -1, 0.1, 0.0);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
    ClassReport r = classify(nf);
    CHECK(r.table1_row == 'd');
    CHECK(r.table2_case == 4);
    CHECK(r.group == "Z");
    REQUIRE(r.generators.size() == 1);
    CHECK(r.generators[0].kind == "sigma");
    CHECK(r.generators[0].residual < 1e-8);
    CHECK(r.isom_compact == Tribool::yes); // mu depends on y

    // n = 0 with irrational Lcal certificate is also case 4
    NormalFormClosed n0;
    n0.Lambda = 1.0;
    n0.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0); // Lcal = sqrt(3)
    n0.mu = Fn2::constant(0.3);
    n0.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
    ClassReport r0 = classify(n0);
    CHECK(r0.table2_case == 4);
}

TEST_CASE("case 5: declared period") {
    NormalFormClosed nf;
    nf.n = 2;
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(2, 0.4, 0.0);
    nf.mu = Fn2::harmonic(2, -2, 0.3, 0.0);
    nf.arith.period = std::make_pair(2, 1);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
    ClassReport r = classify(nf);
    CHECK(r.table2_case == 5);
    CHECK(r.group == "Z");
    REQUIRE(r.generators.size() == 2);
    CHECK(r.generators[0].kind == "psi");
    CHECK(r.generators[0].residual < 1e-8);
    CHECK(r.generators[1].kind == "sigma");
}

TEST_CASE("cases 6 and 7: the rationality branches") {
    ClassReport r6 = classify(case6_form());
    CHECK(r6.table2_case == 6);
    CHECK(r6.group == "Z");
    CHECK(r6.isom_compact == Tribool::no);
    REQUIRE(r6.generators.size() == 2);
    CHECK(r6.generators[1].kind == "chi");
    CHECK(r6.generators[1].residual < 1e-8);

    ClassReport r7 = classify(case7_form());
    CHECK(r7.table2_case == 7);
    CHECK(r7.group == "Z2");
    CHECK(r7.isom_compact == Tribool::yes); // k irrational
    REQUIRE(r7.generators.size() == 2);
    CHECK(std::abs(r7.generators[0].C - 2.0 / std::sqrt(3.0)) < 1e-8); // C(sigma) = 2/Lambda
    CHECK(std::abs(r7.generators[1].C) > 1e-8);

    // undecided: missing k certificate
    NormalFormClosed und = case7_form();
    und.arith.k_over_Lambda.kind = CertValue::Kind::absent;
    ClassReport ru = classify(und);
    CHECK(ru.special == "undecided");
    CHECK(!ru.caveats.empty());

    // undecided: missing Lcal certificate
    NormalFormClosed und2 = case6_form();
    und2.arith.Lcal_over_Lambda.kind = CertValue::Kind::absent;
    ClassReport ru2 = classify(und2);
    CHECK(ru2.special == "undecided");
}

TEST_CASE("case 8: flat parabolic torus with irrational slope") {
    NormalFormDio nf;
    nf.n = 1;
    nf.theta = Theta::golden();
    ClassReport r = classify(nf);
    CHECK(r.table2_case == 8);
    CHECK(r.group == "R");
    CHECK(r.flat);
    REQUIRE(r.imC_samples.size() == 3);
    // C(t) linear: samples at t = 0.1, 0.2, 0.4
    CHECK(r.imC_samples[1] == doctest::Approx(2 * r.imC_samples[0]).epsilon(1e-8));
    CHECK(r.imC_samples[2] == doctest::Approx(4 * r.imC_samples[0]).epsilon(1e-8));
    CHECK(r.caveats.empty());
}

TEST_CASE("case 9: L(z) profile with flow generator") {
    NormalFormClosed nf;
    nf.n = 2;
    nf.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0);
    nf.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
    ClassReport r = classify(nf);
    CHECK(r.table2_case == 9);
    CHECK(r.group == "R");
    CHECK(!r.flat);
    REQUIRE(r.generators.size() == 1);
    CHECK(r.generators[0].kind == "flowY");
    CHECK(r.generators[0].residual < 1e-8);
    CHECK(r.isom_compact == Tribool::yes); // Lcal = sqrt(3) irrational

    // with a rational Lcal certificate the isometry group becomes non-compact
    NormalFormClosed nc = nf;
    nc.Lambda = std::sqrt(3.0);
    nc.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
    ClassReport rc = classify(nc);
    CHECK(rc.table2_case == 9);
    CHECK(rc.isom_compact == Tribool::no);
}

TEST_CASE("flat torus inputs are rejected with the GL3 remark") {
    NormalFormDio nf; // n = 0 flat
    nf.theta = Theta::golden();
    ClassReport r = classify(nf);
    CHECK(r.special == "flat_torus");
    CHECK(!r.caveats.empty());

    NormalFormClosed nc; // n = 0, L = 1, mu = 0: flat
    ClassReport rc = classify(nc);
    CHECK(rc.special == "flat_torus");
}

TEST_CASE("gamma MetricSpec inputs route through the reductions") {
    MetricSpec s = MetricSpec::flat(2, 1.0);
    s.theta = Theta::golden();
    s.nu = Fn2::harmonic(1, 0, 0.4, 0.0); // the y-only mode keeps mu z-free
    s.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
    ClassReport r = classify(s);
    CHECK(r.table1_row == 'c');
    CHECK(r.table2_case == 3); // nu is killed by the reduction, mu(y) remains

    MetricSpec c = MetricSpec::flat(1, 1.0);
    c.theta = Theta::rational(1, 2);
    c.L2 = Fn2::constant(1.0);
    c.mu = Fn2::harmonic(1, 0, 0.3, 0.0) + Fn2::harmonic(1, 2, 0.1, 0.0);
    ClassReport rc = classify(c);
    CHECK(rc.table1_row == 'd');
    CHECK(rc.table2_case == 4);
}

TEST_CASE("isometry compactness witnesses") {
    // case 6: non-compact, chi' is an isometric witness with C = 0
    NormalFormClosed nf = case6_form();
    AffMap chip = make_generator("chi_prime", {}, nf);
    MetricSpec s = nf.to_spec();
    CHECK(normalizes_lattice(chip, s.lattice));
    AffineDefect d = affine_defect(s, chip, 16);
    CHECK(std::abs(d.C) < 1e-8);
    CHECK(d.residual < 1e-8);

    // Lcal = Lambda/2 with k = Lambda/3: non-compact, chi' needs chi^3
    NormalFormClosed half;
    half.Lambda = 2.0 * std::sqrt(3.0);
    half.L2 = Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0); // Lcal = sqrt(3)
    half.k = half.Lambda / 3.0;
    half.mu = Fn2::constant(0.4);
    half.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 2)};
    half.arith.k_over_Lambda = {CertValue::Kind::rational, Rational(1, 3)};
    CHECK(isom_compactness(half) == Tribool::no);
    AffMap chip2 = make_generator("chi_prime", {}, half);
    AffineDefect d2 = affine_defect(half.to_spec(), chip2, 14);
    CHECK(std::abs(d2.C) < 1e-8);
    CHECK(d2.residual < 1e-8);

    // torusA: compact
    CHECK(classify(torusA_spec()).isom_compact == Tribool::yes);
    // mu genuinely y-dependent: compact
    NormalFormClosed yd;
    yd.n = 1;
    yd.mu = Fn2::harmonic(1, 0, 0.4, 0.0);
    std::string why;
    CHECK(isom_compactness(yd, &why) == Tribool::yes);
}
