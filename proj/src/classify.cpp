#include "lolight/classify.hpp"

#include <cmath>
#include <numeric>

#include "lolight/curvature.hpp"

namespace lolight {

namespace {

constexpr double FLAT_TOL = 1e-8;

GeneratorReport verify_generator(const MetricSpec& spec, const std::string& kind,
                                 const GeneratorParams& params, const AffMap& map) {
    GeneratorReport rep;
    rep.kind = kind;
    rep.params = params;
    rep.normalizes = normalizes_lattice(map, spec.lattice);
    if (!rep.normalizes) return rep;
    AffineDefect d = affine_defect(spec, map, 20);
    rep.C = d.C;
    rep.residual = std::max(d.residual, d.C_spread);
    auto [E, N] = decompose_E(spec, map, {0, 0.31, 0.77});
    rep.N_squared = (N * N).max_abs();
    rep.r_invariance = check_r_invariance(spec, map, 20);
    return rep;
}

void check_flow_linearity(ClassReport& rep, const MetricSpec& spec,
                          const std::function<AffMap(double)>& flow) {
    // C(t) must be linear in t with slope != 0: sample three times
    double c1 = affine_defect(spec, flow(0.1), 12).C;
    double c2 = affine_defect(spec, flow(0.2), 12).C;
    double c4 = affine_defect(spec, flow(0.4), 12).C;
    rep.imC_samples = {c1, c2, c4};
    double colinearity = std::abs(c4 - c1 - 3.0 * (c2 - c1));
    if (colinearity > 1e-8)
        rep.caveats.push_back("flow defect deviates from linearity: " +
                              std::to_string(colinearity));
    if (std::abs(c2 - c1) < 1e-12) rep.caveats.push_back("flow defect slope vanishes");
}

std::pair<long, long> bezout(long x, long y) {
    // returns (u, v) with u x + v y = gcd(x, y)
    long u0 = 1, v0 = 0, u1 = 0, v1 = 1, a = x, b = y;
    while (b != 0) {
        long q = a / b;
        long t = a - q * b;
        a = b;
        b = t;
        long tu = u0 - q * u1, tv = v0 - q * v1;
        u0 = u1;
        v0 = v1;
        u1 = tu;
        v1 = tv;
    }
    if (a < 0) {
        a = -a;
        u0 = -u0;
        v0 = -v0;
    }
    return {u0, v0};
}

ClassReport classify_torus(const MetricSpec& spec) {
    ClassReport rep;
    rep.table1_row = (spec.lattice.kind == Lattice::Kind::torusA) ? 'a' : 'b';
    rep.table2_case = 1;
    rep.group = "trivial";
    rep.isom_compact = Tribool::yes;
    rep.imC = "{0}";
    rep.flat = false;
    // the torus metrics have the same entry shape as a Gamma_0 metric; the
    // curvature evaluator only reads the entries
    MetricSpec curv = spec;
    curv.lattice = Lattice::gamma(0);
    rep.r_sup = curvature_r_sup(curv, 32);
    rep.caveats.push_back("Aff(g) = Isom(g) = translations preserving the profile");
    rep.caveats.push_back("tau declared irrational, trusted input");
    // every lattice-commuting candidate translation is an isometry: C = 0
    MetricField f = coords_field(spec);
    // translations along the directions preserving the profile
    AffMap tr = AffMap::translation(0.37, spec.lattice.kind == Lattice::Kind::torusA ? 0.29 : 0.0,
                                    spec.lattice.kind == Lattice::Kind::torusA ? 0.0 : 0.41);
    AffineDefect d = affine_defect_field(f, tr, 12);
    GeneratorReport g;
    g.kind = "isometric_translation";
    g.C = d.C;
    g.residual = d.residual;
    g.normalizes = normalizes_lattice(tr, spec.lattice);
    g.N_squared = 0;
    rep.generators.push_back(g);
    return rep;
}

ClassReport classify_dio(const NormalFormDio& nf) {
    nf.validate();
    ClassReport rep;
    rep.table1_row = 'c';
    if (nf.theta.kind == Theta::Kind::declared)
        rep.caveats.push_back("slope is a declared Diophantine float (eps_div = " +
                              std::to_string(nf.theta.eps_div) +
                              "); irrationality is a trusted input");
    MetricSpec spec = nf.to_spec();
    rep.r_sup = curvature_r_sup(spec, 32);
    rep.flat = rep.r_sup < FLAT_TOL;
    rep.isom_compact = Tribool::yes; // row (c) isometry groups are compact

    if (rep.flat) {
        if (nf.n == 0) {
            rep.special = "flat_torus";
            rep.group = "GL3(Z)-quotient";
            rep.imC = "not classified here";
            rep.caveats.push_back(
                "flat 3-torus: decomposable, Aff/Isom = GL3(Z)/(GL3(Z) cap Isom)");
            return rep;
        }
        rep.table2_case = 8;
        rep.group = "R";
        GeneratorParams p;
        p.s = 1.0;
        rep.generators.push_back(verify_generator(
            spec, "flow_frame", p, make_generator_dio("flow_frame", p, nf)));
        rep.imC = "R";
        check_flow_linearity(rep, spec, [&](double t) {
            return make_generator_dio("flow_frame", {.s = t}, nf);
        });
        return rep;
    }

    bool mu_y_only = !nf.mu.depends_on_z(1e-10) && nf.mu.depends_on_y(1e-10);
    if (nf.n != 0 && mu_y_only) {
        rep.table2_case = 3;
        rep.group = "Z";
        rep.generators.push_back(
            verify_generator(spec, "phi0", {}, make_generator_dio("phi0", {}, nf)));
        double C = rep.generators.back().C;
        rep.imC = "C*Z with C = " + std::to_string(C) +
                  " (published conventions also quote 2*Lambda*Z and 1/Lambda; "
                  "the grid oracle value is asserted)";
        rep.imC_samples = {C};
        return rep;
    }
    rep.table2_case = 2;
    rep.group = "trivial";
    rep.imC = "{0}";
    return rep;
}

ClassReport classify_closed(const NormalFormClosed& nf) {
    nf.validate();
    ClassReport rep;
    rep.table1_row = 'd';
    MetricSpec spec = nf.to_spec();
    rep.r_sup = curvature_r_sup(spec, 32);
    rep.flat = rep.r_sup < FLAT_TOL;

    std::string why;
    rep.isom_compact = isom_compactness(nf, &why);
    if (!why.empty()) rep.caveats.push_back(why);

    bool mu_zero = nf.mu.max_abs_coeff() < 1e-12;
    bool mu_const = nf.mu.is_constant(1e-12);

    if (rep.flat && nf.n == 0) {
        rep.special = "flat_torus";
        rep.group = "GL3(Z)-quotient";
        rep.imC = "not classified here";
        rep.caveats.push_back(
            "flat 3-torus: decomposable, Aff/Isom = GL3(Z)/(GL3(Z) cap Isom)");
        return rep;
    }

    if (nf.n != 0 && mu_zero) {
        rep.table2_case = 9;
        rep.group = "R";
        GeneratorParams p;
        p.s = 1.0;
        rep.generators.push_back(
            verify_generator(spec, "flowY", p, make_generator("flowY", p, nf)));
        rep.imC = "R";
        check_flow_linearity(rep, spec,
                             [&](double t) { return make_generator("flowY", {.s = t}, nf); });
        return rep;
    }

    if (nf.n != 0) {
        // mu depends on y (the normal form leaves no other possibility)
        if (nf.arith.period) {
            AffMap psi;
            try {
                psi = make_generator("psi", {}, nf);
            } catch (const IncompatibleNormalForm& e) {
                rep.caveats.push_back(std::string("declared period rejected: ") + e.what());
                rep.table2_case = 4;
                rep.group = "Z";
                rep.generators.push_back(
                    verify_generator(spec, "sigma", {}, AffMap::sigma()));
                rep.imC = "C(sigma)*Z with C(sigma) = " +
                          std::to_string(rep.generators.back().C);
                rep.imC_samples = {rep.generators.back().C};
                return rep;
            }
            rep.table2_case = 5;
            rep.group = "Z";
            auto [P, Pp] = *nf.arith.period;
            (void)Pp;
            // the period is taken maximal; search up to the active band
            int bound = 2 * std::max({nf.mu.max_y, nf.L2.max_freq, nf.n, 4});
            for (int Pc = bound; Pc > P; --Pc) {
                for (int Ppc = 0; Ppc < nf.n; ++Ppc) {
                    double dy = 1.0 / Pc, dz = static_cast<double>(Ppc) / nf.n;
                    if ((nf.mu.shifted(dy, dz) - nf.mu).max_abs_coeff() < 1e-10 &&
                        (nf.L2.shifted(dz) - nf.L2).max_abs_coeff() < 1e-10) {
                        rep.caveats.push_back("declared period P = " + std::to_string(P) +
                                              " is not maximal: (1/" + std::to_string(Pc) +
                                              ", " + std::to_string(Ppc) +
                                              "/n) also preserves (L, mu)");
                        Pc = P; // stop scanning
                        break;
                    }
                }
            }
            auto [u, v] = bezout(nf.n, P);
            GeneratorParams pu;
            rep.generators.push_back(verify_generator(spec, "psi", pu, psi));
            rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
            // the generating class sigma^v psi^u
            AffMap gen = AffMap::compose(pow(AffMap::sigma(), static_cast<int>(std::abs(v))),
                                         pow(psi, static_cast<int>(std::abs(u))));
            if (v < 0 || u < 0)
                rep.caveats.push_back("generator uses negative powers; defect measured on "
                                      "|powers| composite, additivity gives the class");
            AffineDefect d = affine_defect(spec, gen, 16);
            double Cgen = (v < 0 ? -1 : 1) * std::abs(static_cast<double>(v)) *
                              rep.generators[1].C +
                          (u < 0 ? -1 : 1) * std::abs(static_cast<double>(u)) *
                              rep.generators[0].C;
            rep.imC = "C*Z with C = " + std::to_string(Cgen) + " (published form: (2 Lambda n / P) gcd(n,P) Z)";
            rep.imC_samples = {d.C, Cgen};
            return rep;
        }
        rep.table2_case = 4;
        rep.group = "Z";
        rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
        rep.imC = "C(sigma)*Z with C(sigma) = " + std::to_string(rep.generators.back().C);
        rep.imC_samples = {rep.generators.back().C};
        return rep;
    }

    // n == 0 branch
    if (!mu_const) {
        rep.table2_case = 4;
        rep.group = "Z";
        rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
        rep.imC = "C(sigma)*Z with C(sigma) = " + std::to_string(rep.generators.back().C);
        rep.imC_samples = {rep.generators.back().C};
        return rep;
    }
    // mu constant: the rationality branches need certificates
    const CertValue& lc = nf.arith.Lcal_over_Lambda;
    if (lc.kind == CertValue::Kind::absent) {
        rep.special = "undecided";
        rep.group = "undecided";
        rep.caveats.push_back("missing certificate: Lcal/Lambda rationality (cases 4/6/7)");
        return rep;
    }
    if (lc.kind == CertValue::Kind::irrational) {
        rep.table2_case = 4;
        rep.group = "Z";
        rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
        rep.imC = "C(sigma)*Z with C(sigma) = " + std::to_string(rep.generators.back().C);
        rep.imC_samples = {rep.generators.back().C};
        return rep;
    }
    // Lcal rational: verify numerically
    if (std::abs(nf.Lcal() - lc.value.value() * nf.Lambda) > 1e-9)
        throw VerificationFailed("Lcal certificate does not match the spectral value");
    const CertValue& kc = nf.arith.k_over_Lambda;
    if (kc.kind == CertValue::Kind::absent) {
        rep.special = "undecided";
        rep.group = "undecided";
        rep.caveats.push_back("missing certificate: k/Lambda rationality (cases 6/7)");
        return rep;
    }
    if (kc.kind == CertValue::Kind::rational &&
        std::abs(nf.k - kc.value.value() * nf.Lambda) > 1e-9)
        throw VerificationFailed("k certificate does not match the stored value");

    if (kc.kind == CertValue::Kind::rational) {
        rep.table2_case = 6;
        rep.group = "Z";
        rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
        rep.generators.push_back(
            verify_generator(spec, "chi", {}, make_generator("chi", {}, nf)));
        // b smallest with (b q)(2k + b q Lcal) in 2 Lambda Z; B the integer
        long q = lc.value.q, p = lc.value.p;
        long b = 0, B = 0;
        for (long cand = 1; cand <= 1000000; ++cand) {
            Rational v1(cand * q * kc.value.p, kc.value.q);
            Rational v2(cand * cand * q * p, 2);
            Rational sum(v1.p * v2.q + v2.p * v1.q, v1.q * v2.q);
            if (sum.q == 1) {
                b = cand;
                B = sum.p;
                break;
            }
        }
        if (b == 1 && B == 1) {
            rep.caveats.push_back("degenerate branch B = b = 1: group is <[sigma]>");
            rep.imC = "C(sigma)*Z";
            rep.imC_samples = {rep.generators[0].C};
            return rep;
        }
        auto [u, v] = bezout(B, b);
        double Cgen = static_cast<double>(u) * rep.generators[1].C +
                      static_cast<double>(v) * rep.generators[0].C;
        rep.imC = "C*Z with C = " + std::to_string(Cgen) +
                  " via sigma^v chi^u, u B + v b = gcd(B, b), (b, B) = (" + std::to_string(b) +
                  ", " + std::to_string(B) + ") (published form: (2 Lambda n / b) gcd(B,b) Z)";
        rep.imC_samples = {rep.generators[0].C, rep.generators[1].C, Cgen};
        return rep;
    }

    // k irrational: case 7, Z^2
    rep.table2_case = 7;
    rep.group = "Z2";
    rep.generators.push_back(verify_generator(spec, "sigma", {}, AffMap::sigma()));
    rep.generators.push_back(verify_generator(spec, "chi", {}, make_generator("chi", {}, nf)));
    double Cs = rep.generators[0].C, Cc = rep.generators[1].C;
    rep.imC = "C(sigma)*Z + C(chi)*Z, rationally independent (published form: 2 Lambda (Z + alpha Z))";
    rep.imC_samples = {Cs, Cc};
    // independence spot check: Cc / Cs should be irrational; compare with the
    // certificate-backed expectation alpha = k / Lambda mod Q
    if (std::abs(Cs) > 1e-12) {
        double ratio = Cc / Cs;
        if (nearly_integer(ratio, 1e-9))
            rep.caveats.push_back("defect ratio unexpectedly integral: " +
                                  std::to_string(ratio));
    }
    return rep;
}

} // namespace

Tribool isom_compactness(const NormalFormClosed& nf, std::string* why) {
    if (!nf.mu.is_constant(1e-12)) {
        if (why) *why = "";
        return Tribool::yes; // mu genuinely y-dependent: compact
    }
    const CertValue& lc = nf.arith.Lcal_over_Lambda;
    if (lc.kind == CertValue::Kind::absent) {
        if (why) *why = "isom compactness undecided: missing Lcal/Lambda certificate";
        return Tribool::undecided;
    }
    if (lc.kind == CertValue::Kind::irrational) return Tribool::yes;
    if (std::abs(nf.Lcal() - lc.value.value() * nf.Lambda) > 1e-9)
        throw VerificationFailed("Lcal certificate does not match the spectral value");
    if (nf.n != 0) return Tribool::no; // k = 0 is rational
    const CertValue& kc = nf.arith.k_over_Lambda;
    if (kc.kind == CertValue::Kind::absent) {
        if (why) *why = "isom compactness undecided: missing k/Lambda certificate";
        return Tribool::undecided;
    }
    return kc.kind == CertValue::Kind::rational ? Tribool::no : Tribool::yes;
}

namespace {
ClassReport finish(ClassReport rep, const ClassifyInput& input) {
    imC_description(rep, input);
    return rep;
}
} // namespace

ClassReport classify(const ClassifyInput& input) {
    if (std::holds_alternative<NormalFormDio>(input))
        return finish(classify_dio(std::get<NormalFormDio>(input)), input);
    if (std::holds_alternative<NormalFormClosed>(input))
        return finish(classify_closed(std::get<NormalFormClosed>(input)), input);

    const MetricSpec& spec = std::get<MetricSpec>(input);
    spec.validate();
    if (!spec.lattice.is_gamma()) return finish(classify_torus(spec), input);

    // route gamma specs through the appropriate reduction
    if (spec.theta.is_rational()) {
        auto red = reduce_closed(spec);
        ClassReport rep = classify_closed(red.form);
        if (red.composition_tail > 1e-10)
            rep.caveats.push_back("reduction used spectral reprojection, tail = " +
                                  std::to_string(red.composition_tail));
        return finish(rep, input);
    }
    if (spec.L2.is_constant(1e-12)) {
        auto red = reduce_diophantine(spec);
        return finish(classify_dio(red.form), input);
    }
    // irrational slope with nonconstant L: only the coarse decision applies
    ClassReport rep;
    rep.table1_row = 'c';
    rep.r_sup = curvature_r_sup(spec, 32);
    rep.flat = rep.r_sup < FLAT_TOL;
    rep.table2_case = rep.flat && spec.n() != 0 ? 8 : 2;
    rep.group = rep.table2_case == 8 ? "R" : "trivial";
    rep.isom_compact = Tribool::yes;
    rep.imC = rep.table2_case == 8 ? "R" : "{0}";
    rep.caveats.push_back("slope irrational with nonconstant L: classified on the given "
                          "chart; the ceiling-function straightening is a separate step");
    return finish(rep, input);
}

void imC_description(ClassReport& report, const ClassifyInput& input) {
    (void)input;
    if (report.imC.empty()) report.imC = "{0}";
    // numeric spot checks backing the symbolic description
    if (report.group == "R") {
        if (report.imC_samples.size() != 3)
            throw VerificationFailed("R-case without the three flow samples");
        double c1 = report.imC_samples[0], c2 = report.imC_samples[1],
               c4 = report.imC_samples[2];
        if (std::abs(c4 - c1 - 3.0 * (c2 - c1)) > 1e-8)
            throw VerificationFailed("Im C = R claim: flow defect is not linear in t");
    } else if (report.group == "Z" && report.table2_case >= 3) {
        if (report.imC_samples.empty() || std::abs(report.imC_samples.back()) < 1e-10)
            throw VerificationFailed("Im C rank-1 claim without a nonzero generator defect");
    } else if (report.group == "Z2") {
        if (report.imC_samples.size() < 2)
            throw VerificationFailed("Im C rank-2 claim needs two measured defects");
        double ratio = report.imC_samples[1] / report.imC_samples[0];
        if (nearly_integer(ratio, 1e-9))
            report.caveats.push_back("rank-2 spot check: defect ratio close to an integer");
    }
}

} // namespace lolight
