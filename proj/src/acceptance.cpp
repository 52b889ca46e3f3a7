#include "lolight/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "lolight/classify.hpp"
#include "lolight/curvature.hpp"
#include "lolight/deform.hpp"
#include "lolight/json_io.hpp"

namespace lolight::acceptance {

namespace {

struct CorpusEntry {
    const char* file;
    const char* expected_case; // "1".."9" or "undecided"
    Tribool expected_compact;
};

constexpr CorpusEntry CORPUS[] = {
    {"case1a_torusA.json", "1", Tribool::yes},
    {"case1b_torusB.json", "1", Tribool::yes},
    {"case2_dio_generic.json", "2", Tribool::yes},
    {"case3_dio_muy.json", "3", Tribool::yes},
    {"case4_closed_generic.json", "4", Tribool::yes},
    {"case5_closed_period.json", "5", Tribool::yes},
    {"case6_closed_rational.json", "6", Tribool::no},
    {"case7_closed_mixed.json", "7", Tribool::yes},
    {"case8_dio_flat.json", "8", Tribool::yes},
    {"case9_closed_flow.json", "9", Tribool::yes},
    {"undecided_missing_cert.json", "undecided", Tribool::undecided},
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

struct Harness {
    std::string dir;
    std::vector<CriterionResult> results;
    std::vector<MetricSpec> specs;

    MetricSpec spec_for(const char* file) const {
        for (std::size_t i = 0; i < std::size(CORPUS); ++i)
            if (file == std::string(CORPUS[i].file)) return specs[i];
        throw Error("unknown corpus file");
    }

    void run(int id, const std::string& name, const std::function<std::string()>& body) {
        CriterionResult r;
        r.id = id;
        r.name = name;
        try {
            r.detail = body();
            r.pass = true;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = e.what();
        }
        results.push_back(r);
    }
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw VerificationFailed(msg);
}

MetricSpec gamma_shaped(const MetricSpec& s) {
    // torus metrics share the Gamma_0 entry shape; the curvature and parallel
    // field checks only read the entries
    MetricSpec c = s;
    c.lattice = Lattice::gamma(0);
    return c;
}

NormalFormClosed reduce_closed_form(const MetricSpec& s) { return reduce_closed(s).form; }
NormalFormDio reduce_dio_form(const MetricSpec& s) { return reduce_diophantine(s).form; }

} // namespace

std::vector<CriterionResult> run_all(const std::string& corpus_dir) {
    Harness h;
    h.dir = corpus_dir;
    for (const auto& e : CORPUS) h.specs.push_back(io::load_spec_file(corpus_dir + "/" + e.file));

    // 1. parallel-field suite ------------------------------------------------
    h.run(1, "parallel field: sup |nabla d_x| < 1e-9 at 16^3 on all corpus specs", [&] {
        // the entries are x-independent, so the 16^3 grid collapses to 16^2
        auto t0 = std::chrono::steady_clock::now();
        double worst = 0;
        for (const auto& s : h.specs)
            worst = std::max(worst, check_parallel_X(gamma_shaped(s), 16));
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        require(worst < 1e-9, "residual " + fmt(worst));
        require(secs < 5.0, "runtime " + fmt(secs) + " s exceeds 5 s");
        return "worst residual " + fmt(worst) + ", " + fmt(secs) + " s";
    });

    // 2. Gauss-Bonnet --------------------------------------------------------
    h.run(2, "Gauss-Bonnet: |int r w| < 1e-6 at 64^2, quartered at 128^2", [&] {
        double worst64 = 0, worst_ratio = 0;
        for (const auto& s : h.specs) {
            MetricSpec g = gamma_shaped(s);
            double a = std::abs(gauss_bonnet(g, 64));
            double b = std::abs(gauss_bonnet(g, 128));
            require(a < 1e-6, std::string(" |GB_64| = ") + fmt(a));
            require(b <= std::max(a / 4.0, 1e-12),
                    "refinement did not quarter: " + fmt(a) + " -> " + fmt(b));
            worst64 = std::max(worst64, a);
            worst_ratio = std::max(worst_ratio, a > 1e-12 ? b / a : 0.0);
        }
        return "worst |GB_64| " + fmt(worst64);
    });

    // 3. curvature oracle equivalence ----------------------------------------
    h.run(3, "closed-form r vs full tensor < 1e-6 on five normal forms", [&] {
        std::vector<MetricSpec> forms;
        MetricSpec anchor = MetricSpec::flat(0, 1.0);
        anchor.mu = Fn2::harmonic(1, 0, 1.0, 0.0);
        forms.push_back(anchor);
        forms.push_back(reduce_closed_form(h.spec_for("case4_closed_generic.json")).to_spec());
        forms.push_back(reduce_closed_form(h.spec_for("case5_closed_period.json")).to_spec());
        forms.push_back(reduce_closed_form(h.spec_for("case6_closed_rational.json")).to_spec());
        forms.push_back(reduce_closed_form(h.spec_for("case9_closed_flow.json")).to_spec());
        double worst = 0;
        for (std::size_t fi = 0; fi < forms.size(); ++fi) {
            const MetricSpec& s = forms[fi];
            Fn2 rc = curvature_r_closed_form(s);
            CurvatureEvaluator full(s);
            for (int i = 0; i < 24; ++i)
                for (int j = 0; j < 24; ++j) {
                    double y = i / 24.0, z = j / 24.0;
                    double diff = std::abs(rc(y, z) - full(y, z));
                    worst = std::max(worst, diff);
                    if (fi == 0) {
                        double frozen = -2.0 * M_PI * M_PI * std::cos(TWO_PI * y);
                        require(std::abs(rc(y, z) - frozen) < 1e-9,
                                "anchor r != -2 pi^2 cos(2 pi y)");
                    }
                }
        }
        require(worst < 1e-6, "sup difference " + fmt(worst));
        return "sup |closed form - full tensor| = " + fmt(worst);
    });

    // 4. cohomological solver -------------------------------------------------
    h.run(4, "cohomological solver: golden residual < 1e-9; resonance raises", [&] {
        Fn1 hh = Fn1::harmonic(1, 1.0, 0.0) + Fn1::harmonic(2, 0.0, 0.3);
        Theta th = Theta::golden();
        Fn1 psi = solve_cohomological(hh, th);
        double worst = 0;
        for (int i = 0; i < 512; ++i) {
            double z = static_cast<double>(i) / 512;
            worst = std::max(worst,
                             std::abs(psi(z + th.value()) - psi(z) - (hh(z) - mean(hh))));
        }
        require(worst < 1e-9, "functional-equation residual " + fmt(worst));
        bool threw = false;
        try {
            solve_cohomological(hh, Theta::rational(1, 2));
        } catch (const ResonantFrequency&) {
            threw = true;
        }
        require(threw, "rational resonance did not raise ResonantFrequency");
        return "residual " + fmt(worst) + ", resonance raised";
    });

    // 5. generator suite -------------------------------------------------------
    h.run(5, "generators sigma/phi0/flowY/chi/psi pass the invariant suite", [&] {
        struct Item {
            const char* file;
            const char* kind;
            bool dio;
        };
        const Item items[] = {
            {"case4_closed_generic.json", "sigma", false},
            {"case3_dio_muy.json", "phi0", true},
            {"case9_closed_flow.json", "flowY", false},
            {"case6_closed_rational.json", "chi", false},
            {"case5_closed_period.json", "psi", false},
        };
        std::string detail;
        for (const auto& it : items) {
            MetricSpec s = h.spec_for(it.file);
            AffMap map;
            MetricSpec nf_spec = s;
            if (it.dio) {
                NormalFormDio nf = reduce_dio_form(s);
                GeneratorParams p;
                p.s = 1.0;
                map = make_generator_dio(it.kind, p, nf);
                nf_spec = nf.to_spec();
            } else {
                NormalFormClosed nf = reduce_closed_form(s);
                GeneratorParams p;
                p.s = 1.0;
                map = make_generator(it.kind, p, nf);
                nf_spec = nf.to_spec();
            }
            require(normalizes_lattice(map, nf_spec.lattice),
                    std::string(it.kind) + ": not lattice-normalizing");
            AffineDefect d = affine_defect(nf_spec, map, 20);
            require(d.residual < 1e-8, std::string(it.kind) + ": defect residual " +
                                           fmt(d.residual));
            require(d.C_spread < 1e-8, std::string(it.kind) + ": C spread " + fmt(d.C_spread));
            auto [E, N] = decompose_E(nf_spec, map, {0, 0.29, 0.63});
            require((N * N).max_abs() < 1e-8, std::string(it.kind) + ": N^2 != 0");
            double ri = check_r_invariance(nf_spec, map, 16);
            require(ri < 1e-7, std::string(it.kind) + ": r-invariance " + fmt(ri));
            detail += std::string(it.kind) + " C=" + fmt(d.C) + "; ";
        }
        return detail;
    });

    // 6. defect additivity ------------------------------------------------------
    h.run(6, "defect additivity over 10 generator pairs", [&] {
        NormalFormClosed c9 = reduce_closed_form(h.spec_for("case9_closed_flow.json"));
        NormalFormClosed c6 = reduce_closed_form(h.spec_for("case6_closed_rational.json"));
        NormalFormClosed c7 = reduce_closed_form(h.spec_for("case7_closed_mixed.json"));
        NormalFormClosed c5 = reduce_closed_form(h.spec_for("case5_closed_period.json"));
        NormalFormDio c3 = reduce_dio_form(h.spec_for("case3_dio_muy.json"));
        NormalFormDio c8 = reduce_dio_form(h.spec_for("case8_dio_flat.json"));
        std::mt19937 rng(24601);
        std::uniform_real_distribution<double> U(0.1, 0.9);
        struct Pair {
            MetricSpec s;
            AffMap a, b;
        };
        std::vector<Pair> pairs;
        pairs.push_back({c9.to_spec(), AffMap::flow_Y(U(rng), c9.n), AffMap::flow_Y(U(rng), c9.n)});
        pairs.push_back({c9.to_spec(), AffMap::sigma(), AffMap::flow_Y(U(rng), c9.n)});
        pairs.push_back({c9.to_spec(), AffMap::sigma(), AffMap::sigma()});
        pairs.push_back({c6.to_spec(), AffMap::sigma(), make_generator("chi", {}, c6)});
        pairs.push_back({c6.to_spec(), make_generator("chi", {}, c6),
                         make_generator("chi", {}, c6)});
        pairs.push_back({c7.to_spec(), AffMap::sigma(), make_generator("chi", {}, c7)});
        pairs.push_back({c5.to_spec(), AffMap::sigma(), make_generator("psi", {}, c5)});
        pairs.push_back({c5.to_spec(), make_generator("psi", {}, c5),
                         make_generator("psi", {}, c5)});
        pairs.push_back({c3.to_spec(), make_generator_dio("phi0", {}, c3),
                         make_generator_dio("phi0", {}, c3)});
        GeneratorParams p1, p2;
        p1.s = U(rng);
        p2.s = U(rng);
        pairs.push_back({c8.to_spec(), make_generator_dio("flow_frame", p1, c8),
                         make_generator_dio("flow_frame", p2, c8)});
        double worst = 0;
        for (const auto& pr : pairs) {
            double ca = affine_defect(pr.s, pr.a, 14).C;
            double cb = affine_defect(pr.s, pr.b, 14).C;
            double cab = affine_defect(pr.s, AffMap::compose(pr.a, pr.b), 14).C;
            worst = std::max(worst, std::abs(cab - ca - cb));
        }
        require(worst < 1e-8, "additivity defect " + fmt(worst));
        return "10 pairs, worst |C(ab) - Ca - Cb| = " + fmt(worst);
    });

    // 7. classification --------------------------------------------------------
    h.run(7, "corpus classifies to the labeled cases; R-flows linear", [&] {
        std::string detail;
        for (std::size_t i = 0; i < std::size(CORPUS); ++i) {
            ClassReport rep = classify(h.specs[i]);
            std::string got = rep.special.empty() ? std::to_string(rep.table2_case)
                                                  : rep.special;
            require(got == CORPUS[i].expected_case,
                    std::string(CORPUS[i].file) + ": case " + got + " != " +
                        CORPUS[i].expected_case);
            if (got == "8" || got == "9") {
                require(rep.imC_samples.size() == 3, "missing flow samples");
                double c1 = rep.imC_samples[0], c2 = rep.imC_samples[1],
                       c4 = rep.imC_samples[2];
                double fit = std::abs(c4 - c1 - 3.0 * (c2 - c1));
                require(fit < 1e-8, "flow C(t) nonlinear, fit residual " + fmt(fit));
                require(std::abs(c2 - c1) > 1e-12, "flow slope vanished");
            }
            detail += got + " ";
        }
        return "cases: " + detail;
    });

    // 8. isometry compactness witness -------------------------------------------
    h.run(8, "non-compact corpus cases produce an isometric chi' witness", [&] {
        std::string detail;
        for (std::size_t i = 0; i < std::size(CORPUS); ++i) {
            ClassReport rep = classify(h.specs[i]);
            Tribool expect = CORPUS[i].expected_compact;
            require(rep.isom_compact == expect,
                    std::string(CORPUS[i].file) + ": compactness flag mismatch");
            if (expect == Tribool::no) {
                NormalFormClosed nf = reduce_closed_form(h.specs[i]);
                AffMap chip = make_generator("chi_prime", {}, nf);
                MetricSpec s = nf.to_spec();
                require(normalizes_lattice(chip, s.lattice), "chi' not normalizing");
                AffineDefect d = affine_defect(s, chip, 16);
                require(std::abs(d.C) < 1e-8, "chi' defect C = " + fmt(d.C));
                require(d.residual < 1e-8, "chi' residual " + fmt(d.residual));
                detail += std::string(CORPUS[i].file) + " chi' C=" + fmt(d.C) + "; ";
            }
        }
        return detail.empty() ? "no non-compact cases?" : detail;
    });

    // 9. deformation -------------------------------------------------------------
    h.run(9, "flat deformation paths carry the case generators", [&] {
        const std::vector<double> TS{0.0, 0.25, 0.5, 0.75, 1.0};
        // torus cases: profile-preserving translations stay isometric along
        // the entry-interpolation path
        for (const char* f : {"case1a_torusA.json", "case1b_torusB.json"}) {
            MetricSpec s = h.spec_for(f);
            bool A = s.lattice.kind == Lattice::Kind::torusA;
            AffMap tr = AffMap::translation(0.37, A ? 0.29 : 0.0, A ? 0.0 : 0.41);
            for (double t : TS) {
                MetricSpec st = s;
                st.L2 = s.L2 * t + Fn2::constant(1.0 - t);
                st.mu = s.mu * t;
                AffineDefect d = affine_defect(st, tr, 12);
                require(std::abs(d.C) < 1e-10 && d.residual < 1e-8,
                        std::string(f) + ": translation not isometric at t");
                if (t == 0.0)
                    require(curvature_r_sup(gamma_shaped(st), 16) < 1e-8,
                            std::string(f) + ": g_0 not flat");
            }
        }
        // Diophantine family
        {
            NormalFormDio c2 = reduce_dio_form(h.spec_for("case2_dio_generic.json"));
            verify_along_path_dio(c2, AffMap::translation(0.5, 0, 0), TS);
            NormalFormDio c3 = reduce_dio_form(h.spec_for("case3_dio_muy.json"));
            verify_along_path_dio(c3, make_generator_dio("phi0", {}, c3), TS);
            NormalFormDio c8 = reduce_dio_form(h.spec_for("case8_dio_flat.json"));
            GeneratorParams p;
            p.s = 1.0;
            verify_along_path_dio(c8, make_generator_dio("flow_frame", p, c8), TS);
            require(curvature_r_sup(deform_path_dio(c2, 0.0), 16) < 1e-8, "dio g_0 not flat");
            require(curvature_r_sup(deform_path_dio(c3, 0.0), 16) < 1e-8, "dio g_0 not flat");
        }
        // closed family, generic path
        {
            for (const char* f : {"case4_closed_generic.json", "case5_closed_period.json",
                                  "case6_closed_rational.json", "case7_closed_mixed.json",
                                  "case9_closed_flow.json", "undecided_missing_cert.json"}) {
                NormalFormClosed nf = reduce_closed_form(h.spec_for(f));
                verify_along_path(nf, AffMap::sigma(), TS);
                require(curvature_r_sup(deform_path(nf, 0.0), 16) < 1e-8,
                        std::string(f) + ": g_0 not flat");
            }
            NormalFormClosed c5 = reduce_closed_form(h.spec_for("case5_closed_period.json"));
            verify_along_path(c5, make_generator("psi", {}, c5), TS);
            NormalFormClosed c9 = reduce_closed_form(h.spec_for("case9_closed_flow.json"));
            GeneratorParams p;
            p.s = 1.0;
            verify_along_path(c9, make_generator("flowY", p, c9), TS);
        }
        // chi along its case-(iv) family (flag-gated path, certificates needed)
        for (const char* f : {"case6_closed_rational.json", "case7_closed_mixed.json"}) {
            NormalFormClosed nf = reduce_closed_form(h.spec_for(f));
            CaseIvFamily fam = case_iv_family(nf);
            for (double t : TS) {
                AffineDefect d = fam.defect_at(t);
                require(d.residual < 1e-8 && d.C_spread < 1e-8,
                        std::string(f) + ": chi defect broke at t");
                require(std::abs(d.C - fam.C0) < 1e-8, "chi defect drifted along the family");
            }
            require(curvature_r_sup(fam.flat_endpoint_spec(), 16) < 1e-8,
                    "case-(iv) flat endpoint not flat");
        }
        return "all case generators pass at t in {0, 1/4, 1/2, 3/4, 1}";
    });

    // 10. holonomy -----------------------------------------------------------------
    h.run(10, "leaf holonomy: ODE transport matches alpha = -d_z L^2 / (2 Lambda)", [&] {
        NormalFormClosed nf = reduce_closed_form(h.spec_for("case9_closed_flow.json"));
        MetricSpec s = nf.to_spec();
        std::string detail;
        for (double z : {0.0, 0.3}) {
            double alpha = leaf_holonomy_alpha(s, z);
            Holonomy2 h2 = parallel_transport_loop(s, z, 2);
            double err = std::max({std::abs(h2.m[0][0] - 1.0), std::abs(h2.m[0][1] - alpha),
                                   std::abs(h2.m[1][0]), std::abs(h2.m[1][1] - 1.0)});
            require(err < 1e-6, "gamma_2 transport error " + fmt(err) + " at z = " + fmt(z));
            Holonomy2 h1 = parallel_transport_loop(s, z, 1, 1 << 12);
            double id_err = std::max({std::abs(h1.m[0][0] - 1.0), std::abs(h1.m[0][1]),
                                      std::abs(h1.m[1][0]), std::abs(h1.m[1][1] - 1.0)});
            require(id_err < 1e-8, "gamma_1 transport error " + fmt(id_err));
            detail += "z=" + fmt(z) + " alpha=" + fmt(alpha) + " err=" + fmt(err) + "; ";
        }
        return detail;
    });

    // 11. normal-form group laws -----------------------------------------------------
    h.run(11, "act_Z composition and act_gl2 round trips", [&] {
        NormalFormClosed nf;
        nf.k = 0.25;
        nf.mu = Fn2::harmonic(1, 0, 0.3, 0.0) + Fn2::harmonic(1, 1, 0.15, 0.0) +
                Fn2::constant(0.2);
        std::mt19937 rng(15937);
        std::uniform_int_distribution<int> L(-3, 3);
        for (int t = 0; t < 6; ++t) {
            int l1 = L(rng), l2 = L(rng);
            auto lhs = act_Z(nf, l1 + l2);
            auto rhs = act_Z(act_Z(nf, l2), l1);
            require(std::abs(lhs.k - rhs.k) < 1e-10 &&
                        (lhs.mu - rhs.mu).max_abs_coeff() < 1e-10 &&
                        (lhs.L2 - rhs.L2).max_abs_coeff() < 1e-12,
                    "act_Z composition broke at (" + std::to_string(l1) + "," +
                        std::to_string(l2) + ")");
        }
        NormalFormDio g;
        g.theta = Theta::golden();
        g.L = 1.2;
        g.k = 0.4;
        g.mu = Fn2::harmonic(1, -1, 0.2, 0.1) + Fn2::constant(0.9);
        struct M4 {
            long a, b, c, d;
        };
        for (const M4& m : {M4{1, 1, 0, 1}, M4{2, 1, 1, 1}, M4{1, 0, 1, 1}}) {
            auto fwd = act_gl2(g, m.a, m.b, m.c, m.d);
            auto back = act_gl2(fwd, m.d, -m.b, -m.c, m.a);
            require(std::abs(back.theta.value() - g.theta.value()) < 1e-11 &&
                        std::abs(back.Lambda - g.Lambda) < 1e-10 &&
                        std::abs(back.L - g.L) < 1e-10 && std::abs(back.k - g.k) < 1e-9,
                    "gl2 round trip tuple drifted");
            double m1 = std::hypot(back.mu.coeff_a(1, -1), back.mu.coeff_b(1, -1));
            double m0 = std::hypot(g.mu.coeff_a(1, -1), g.mu.coeff_b(1, -1));
            require(std::abs(m1 - m0) < 1e-9 && std::abs(mean(back.mu) - mean(g.mu)) < 1e-9,
                    "gl2 round trip mu drifted beyond the translation quotient");
        }
        return "act_Z over 6 random pairs; gl2 round trips for 3 matrices";
    });

    // 12. sigma-constant adjudication ---------------------------------------------------
    h.run(12, "C(sigma) adjudication: oracle value with internal consistency", [&] {
        NormalFormClosed nf = reduce_closed_form(h.spec_for("case6_closed_rational.json"));
        MetricSpec s = nf.to_spec();
        double C1 = affine_defect(s, AffMap::sigma(), 16).C;
        double C2 = affine_defect(s, pow(AffMap::sigma(), 2), 16).C;
        double C3 = affine_defect(s, pow(AffMap::sigma(), 3), 16).C;
        require(std::abs(C2 - 2 * C1) < 1e-8 && std::abs(C3 - 3 * C1) < 1e-8,
                "C(sigma^k) != k C(sigma)");
        require(std::abs(C1 - 2.0 / nf.Lambda) < 1e-10,
                "oracle C(sigma) deviates from 2/Lambda");
        std::ostringstream os;
        os << "oracle C(sigma) = " << C1 << " = 2/Lambda; published conventions also "
           << "quote 1/Lambda = " << 1.0 / nf.Lambda << " and 2 Lambda = "
           << 2.0 * nf.Lambda << "; the artifact asserts the oracle value only";
        return os.str();
    });

    return h.results;
}

int report(const std::vector<CriterionResult>& results) {
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%2d] %s  %s\n     %s\n", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%zu/%zu acceptance criteria passed\n", results.size() - failures,
                results.size());
    return failures;
}

} // namespace lolight::acceptance
