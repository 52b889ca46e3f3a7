#include "lolight/normalform.hpp"

#include <cmath>

namespace lolight {

// --------------------------- normal form types ------------------------------

MetricSpec NormalFormDio::to_spec() const {
    MetricSpec s;
    s.lattice = Lattice::gamma(n);
    s.theta = theta;
    s.Lambda = Lambda;
    s.L2 = Fn2::constant(L * L);
    s.nu = Fn2::constant(k);
    s.mu = mu;
    s.arith = arith;
    return s;
}

void NormalFormDio::validate() const {
    if (Lambda <= 0) throw MalformedInput("normal form requires Lambda > 0");
    if (L <= 0) throw MalformedInput("normal form requires L > 0");
    if (theta.is_rational()) throw MalformedInput("Diophantine form requires irrational slope");
    if (k < -1e-12 || k >= Lambda - 1e-12)
        throw MalformedInput("normal form requires k in [0, Lambda)");
    Fn1 fm = fiber_mean(mu, 'y');
    if (!fm.is_constant(1e-9))
        throw MalformedInput("fiber mean of mu must be constant");
    if (n != 0) {
        if (std::abs(k) > 1e-9) throw MalformedInput("n != 0 requires k = 0");
        if (std::abs(fm.mean()) > 1e-9) throw MalformedInput("n != 0 requires mean-free mu");
    } else if (fm.mean() < -1e-12 || fm.mean() >= 2 * Lambda - 1e-12) {
        throw MalformedInput("fiber mean of mu must lie in [0, 2 Lambda)");
    }
}

MetricSpec NormalFormClosed::to_spec() const {
    MetricSpec s;
    s.lattice = Lattice::gamma(n);
    s.theta = Theta::rational(0, 1);
    s.Lambda = Lambda;
    s.L2 = Fn2::from_1d_z(L2);
    s.nu = Fn2::constant(k);
    s.mu = mu;
    s.arith = arith;
    return s;
}

void NormalFormClosed::validate() const {
    if (Lambda <= 0) throw MalformedInput("normal form requires Lambda > 0");
    for (int i = 0; i < 64; ++i)
        if (L2(i / 64.0) <= 0) throw MalformedInput("L^2 must be positive");
    if (k < -1e-12 || k >= Lambda - 1e-12)
        throw MalformedInput("normal form requires k in [0, Lambda)");
    Fn1 fm = fiber_mean(mu, 'y');
    if (!fm.is_constant(1e-9))
        throw MalformedInput("fiber mean of mu must be constant");
    if (n != 0) {
        if (std::abs(k) > 1e-9) throw MalformedInput("n != 0 requires k = 0");
        if (std::abs(fm.mean()) > 1e-9) throw MalformedInput("n != 0 requires mean-free mu");
    } else if (fm.mean() < -1e-12 || fm.mean() >= 2 * Lambda - 1e-12) {
        throw MalformedInput("fiber mean of mu must lie in [0, 2 Lambda)");
    }
}

double NormalFormClosed::Lcal(int band) const {
    if (L2.is_constant(0.0)) return L2.mean();
    return 1.0 / reciprocal(L2, std::max(band, 4 * L2.max_freq)).mean();
}

Fn1 NormalFormClosed::H_periodic_part(int band) const {
    if (L2.is_constant(0.0)) return Fn1::constant(0.0);
    Fn1 invL2 = reciprocal(L2, std::max(band, 4 * L2.max_freq));
    double Lc = 1.0 / invL2.mean();
    Fn1 P = (invL2 * Lc + Fn1::constant(-1.0)).antiderivative_mean_zero();
    return P + Fn1::constant(-P(0.0));
}

// ------------------------------ straighten ----------------------------------

StraightenResult straighten_slope(const Fn1& ceiling, const Theta& theta) {
    for (int i = 0; i < 64; ++i)
        if (ceiling(i / 64.0) <= 0) throw MalformedInput("ceiling function must be positive");
    StraightenResult r;
    r.return_time = ceiling.mean();
    // conjugacy (t, z) -> (t + psi(z), z): need psi(R z) - psi(z) = mean - c(z)
    r.shift = solve_cohomological(ceiling * -1.0, theta);
    return r;
}

// --------------------------- reduction helpers ------------------------------

namespace {

struct Pipeline {
    MetricSpec cur;
    AffMap total = AffMap::identity();
    double tail = 0;
    int band;

    explicit Pipeline(const MetricSpec& s, int b = 48) : cur(s), band(b) {}

    void apply(const AffMap& step, const Theta& theta_new) {
        cur = pullback_spec(cur, step, theta_new, 1e-9, band, &tail);
        total = AffMap::compose(total, step, band);
    }
    void apply(const AffMap& step) { apply(step, cur.theta); }
};

// integer lift x -> x + p y + q z: k += (p + theta q) Lambda, mu += 2 Lambda q.
void normalize_ranges(Pipeline& pipe) {
    MetricSpec& s = pipe.cur;
    double th = s.theta.value();
    double fm = fiber_mean(s.mu, 'y').mean();
    long q = -static_cast<long>(std::floor(fm / (2.0 * s.Lambda)));
    double k = mean(s.nu);
    long p = -static_cast<long>(std::floor(k / s.Lambda + th * q));
    if (p != 0 || q != 0) pipe.apply(AffMap::x_shear_int(p, q));
}

// n != 0 tail: flow of U kills the fiber mean, flow of Z kills k.
void kill_k_and_mean(Pipeline& pipe) {
    MetricSpec& s = pipe.cur;
    int n = s.n();
    if (n == 0) return;
    double th = s.theta.value();
    (void)th;
    double I = fiber_mean(s.mu, 'y').mean();
    double s0 = -I / (2.0 * n * s.Lambda);
    if (std::abs(s0) > 1e-15) pipe.apply(AffMap::flow_Y(s0, n));
    double k = mean(pipe.cur.nu);
    double t0 = k / (n * s.Lambda);
    if (std::abs(t0) > 1e-15) pipe.apply(AffMap::flow_Z(t0));
}

// flatten z -> int_0^1 mu(y,z) dy to a constant via an x + F(z) shear
void flatten_fiber_mean(Pipeline& pipe) {
    Fn1 I = fiber_mean(pipe.cur.mu, 'y');
    if (I.is_constant(1e-14)) return;
    Fn1 Fprime = (Fn1::constant(I.mean()) - I) * (1.0 / (2.0 * pipe.cur.Lambda));
    Fn1 F = Fprime.antiderivative_mean_zero();
    pipe.apply(AffMap::x_shear(Fn2::from_1d_z(F)));
}

} // namespace

// --------------------------- reduce: Diophantine ----------------------------

Reduction<NormalFormDio> reduce_diophantine(const MetricSpec& spec) {
    spec.validate();
    if (!spec.lattice.is_gamma())
        throw MalformedInput("reduce_diophantine expects a gamma lattice");
    if (spec.theta.is_rational())
        throw NonDiophantineSlope("rational slope: use reduce_closed");
    if (!spec.theta.is_diophantine_certified())
        throw NonDiophantineSlope("slope lacks a Diophantine certificate");
    if (spec.L2.max_abs_coeff() > 0 && !spec.L2.is_constant(1e-12))
        throw NonConstantL("reduce_diophantine requires constant L^2; straighten the "
                           "suspension first");

    Pipeline pipe(spec);

    // Lambda > 0 via sign flips (theta is preserved by the chosen flips).
    if (pipe.cur.Lambda < 0) {
        if (spec.n() == 0)
            pipe.apply(AffMap::signs(-1, 1, 1));
        else
            pipe.apply(AffMap::signs(1, -1, -1), pipe.cur.theta);
    }

    // (i) make nu constant: x-shear by N from the directional solver.
    if (!pipe.cur.nu.is_constant(1e-13)) {
        auto [N, kk] = solve_directional(pipe.cur.nu * (-1.0 / pipe.cur.Lambda), pipe.cur.theta);
        (void)kk;
        pipe.apply(AffMap::x_shear(N));
        if (!pipe.cur.nu.is_constant(1e-9))
            throw VerificationFailed("nu did not become constant");
    }
    // (ii) flatten the fiber mean of mu.
    flatten_fiber_mean(pipe);
    // (iii) integer lifts into the fundamental ranges.
    normalize_ranges(pipe);
    // (iv) n != 0: kill k and the fiber mean by the two flows.
    kill_k_and_mean(pipe);

    NormalFormDio nf;
    nf.n = spec.n();
    nf.theta = pipe.cur.theta;
    nf.Lambda = pipe.cur.Lambda;
    nf.L = std::sqrt(pipe.cur.L2.mean());
    nf.k = (nf.n != 0) ? 0.0 : mean(pipe.cur.nu);
    nf.mu = pipe.cur.mu.trimmed(1e-14);
    nf.arith = spec.arith;
    if (nf.n != 0 && std::abs(mean(pipe.cur.nu)) > 1e-9)
        throw VerificationFailed("k did not vanish for n != 0");
    nf.validate();
    return {nf, pipe.total, pipe.tail};

}

// ----------------------------- reduce: closed -------------------------------

Reduction<NormalFormClosed> reduce_closed(const MetricSpec& spec) {
    spec.validate();
    if (!spec.lattice.is_gamma())
        throw MalformedInput("reduce_closed expects a gamma lattice");
    if (!spec.theta.is_rational())
        throw MalformedInput("reduce_closed expects a rational slope");

    Pipeline pipe(spec, std::max(48, 4 * std::max(spec.mu.max_z, spec.L2.max_z)));

    // Step 0: integer shear to the theta = 0 chart. For theta = p/q the
    // matrix M = (a b; -p q) with a q + b p = 1 sends the slope to 0; the
    // pullback goes through the normalizing map of M^{-1} = (q -b; p a).
    if (!spec.theta.is_zero()) {
        long p = spec.theta.rat.p, q = spec.theta.rat.q;
        long a = 0, b = 0;
        bool found = false;
        for (long cand = -q; cand <= q && !found; ++cand)
            if ((1 - cand * p) % q == 0) {
                b = cand;
                a = (1 - cand * p) / q;
                found = true;
            }
        if (!found || a * q + b * p != 1) throw Error("failed to build the slope shear");
        pipe.apply(AffMap::gl2_normalizer(q, -b, p, a, spec.n()), Theta::rational(0, 1));
    }
    if (pipe.cur.L2.depends_on_y(1e-10))
        throw NotInNormalForm("L^2 depends on y in the theta = 0 chart; input is not "
                              "leaf-length normalized");

    if (pipe.cur.Lambda < 0)
        throw MalformedInput("closed-leaf reduction requires Lambda > 0");

    // (i) remove the y-dependence of nu: x-shear by the y-antiderivative of
    // (N - nu)/Lambda where N is the fiber mean.
    if (pipe.cur.nu.depends_on_y(1e-13)) {
        Fn2 beta_y = (Fn2::from_1d_z(fiber_mean(pipe.cur.nu, 'y')) - pipe.cur.nu) *
                     (1.0 / pipe.cur.Lambda);
        // y-antiderivative of a function with mean-free y-fibers
        Fn2 W(beta_y.max_y, beta_y.max_z);
        for (int j = 1; j <= beta_y.max_y; ++j)
            for (int k = -beta_y.max_z; k <= beta_y.max_z; ++k) {
                double ca = beta_y.coeff_a(j, k), cb = beta_y.coeff_b(j, k);
                if (ca == 0 && cb == 0) continue;
                // integral of cos/sin(2 pi (j y + k z)) dy
                W.add_mode(j, k, -cb / (TWO_PI * j), ca / (TWO_PI * j));
            }
        pipe.apply(AffMap::x_shear(W));
        if (pipe.cur.nu.depends_on_y(1e-9))
            throw VerificationFailed("nu still depends on y");
    }

    // (ii) make nu constant in z: the h(z) shear of the frame, realized by the
    // coordinate change y -> y - Hhat with Hhat' = -h, h = (kpre - N)/L^2.
    Fn1 N = fiber_mean(pipe.cur.nu, 'y');
    if (!N.is_constant(1e-13)) {
        Fn1 L2z = fiber_mean(pipe.cur.L2, 'y');
        int band = std::max(48, 4 * std::max(L2z.max_freq, N.max_freq));
        Fn1 invL2 = L2z.is_constant(0.0) ? Fn1::constant(1.0 / L2z.mean())
                                         : reciprocal(L2z, band);
        double Lc = 1.0 / invL2.mean();
        double kpre = Lc * (invL2 * N).mean();
        Fn1 h = (Fn1::constant(kpre) - N) * invL2; // mean zero by construction
        if (std::abs(h.mean()) > 1e-10)
            throw VerificationFailed("h(z) shear is not mean-free");
        Fn1 h0 = h + Fn1::constant(-h.mean());
        Fn1 Hhat = (h0 * -1.0).antiderivative_mean_zero();
        AffMap step;
        step.sy = Hhat * -1.0; // y' = y - Hhat... sign fixed by the assert below
        step.xs.p1 = Hhat * (-static_cast<double>(spec.n()));
        step.xs.f2 = Fn2::from_1d_z(Hhat * (0.5 * spec.n()));
        pipe.apply(step);
        if (!pipe.cur.nu.is_constant(1e-8))
            throw VerificationFailed("nu did not become constant after the h-shear");
    }

    // (iii) flatten the fiber mean of mu; (iv) ranges and n != 0 flows.
    flatten_fiber_mean(pipe);
    normalize_ranges(pipe);
    kill_k_and_mean(pipe);

    NormalFormClosed nf;
    nf.n = spec.n();
    nf.Lambda = pipe.cur.Lambda;
    nf.L2 = fiber_mean(pipe.cur.L2, 'y').trimmed(1e-14);
    nf.k = (nf.n != 0) ? 0.0 : mean(pipe.cur.nu);
    nf.mu = pipe.cur.mu.trimmed(1e-14);
    nf.arith = spec.arith;
    nf.validate();
    return {nf, pipe.total, pipe.tail};
}

// ------------------------------ group actions -------------------------------

NormalFormDio act_signs_dio(const NormalFormDio& nf, int e1, int e2, int e3) {
    NormalFormDio out = nf;
    if (nf.n == 0) {
        // (theta, Lambda, L, k, mu) -> (e2 e3 theta, e1 e2 Lambda, L, e2 e3 k,
        // mu(e2 y, e3 z))
        double s = e2 * e3;
        out.theta = (s > 0) ? nf.theta : nf.theta.negated();
        out.Lambda = e1 * e2 * nf.Lambda;
        out.k = s * nf.k;
        out.mu = nf.mu.reflected(e2 < 0, e3 < 0);
    } else {
        if (e1 != e2 * e3)
            throw MalformedInput("n != 0 sign flips have e1 = e2 e3");
        double s = e2 * e3;
        out.theta = (s > 0) ? nf.theta : nf.theta.negated();
        out.Lambda = e3 * nf.Lambda;
        out.mu = nf.mu.reflected(e2 < 0, e3 < 0);
    }
    return out;
}

namespace {

// shared tail: restore Lambda > 0, k and fiber-mean ranges, n != 0 flows,
// going through the MetricSpec pipeline so every step is a recorded pullback.
template <class Extract>
auto renormalize(const MetricSpec& s, Extract&& extract) {
    Pipeline pipe(s);
    if (pipe.cur.Lambda < 0) {
        if (s.n() == 0)
            pipe.apply(AffMap::signs(-1, 1, 1));
        else
            pipe.apply(AffMap::signs(1, -1, -1));
    }
    flatten_fiber_mean(pipe);
    normalize_ranges(pipe);
    kill_k_and_mean(pipe);
    return extract(pipe.cur);
}

} // namespace

NormalFormDio act_gl2(const NormalFormDio& nf, long a, long b, long c, long d) {
    long det = a * d - b * c;
    if (det != 1 && det != -1) throw NonUnimodular("act_gl2 requires |ad - bc| = 1");
    if (det == -1) {
        // split off the reflection (y, z) -> (y, -z) and act by the SL2 part
        NormalFormDio flipped = act_signs_dio(nf, 1, 1, -1);
        // M = M' S with S = diag(1,-1): M' = M S^{-1} = (a, -b; c, -d)
        return act_gl2(flipped, a, -b, c, -d);
    }
    MetricSpec s = nf.to_spec();
    Theta theta_new = nf.theta.moebius(a, b, c, d);
    // coordinate change is the normalizing map of M^{-1} = (d, -b; -c, a)
    AffMap F = AffMap::gl2_normalizer(d, -b, -c, a, nf.n);
    MetricSpec pulled = pullback_spec(s, F, theta_new);
    NormalFormDio out = renormalize(pulled, [&](const MetricSpec& m) {
        NormalFormDio r;
        r.n = nf.n;
        r.theta = m.theta;
        r.Lambda = m.Lambda;
        if (!m.L2.is_constant(1e-9)) throw VerificationFailed("L did not stay constant");
        r.L = std::sqrt(m.L2.mean());
        r.k = (nf.n != 0) ? 0.0 : mean(m.nu);
        r.mu = m.mu.trimmed(1e-14);
        r.arith = nf.arith;
        return r;
    });
    out.validate();
    return out;
}

NormalFormClosed act_Z(const NormalFormClosed& nf, int ell) {
    if (ell == 0) return nf;
    // y -> y + l H(z) with the normalizing x-corrections; the eta gauge and
    // the integer lifts are restored by the shared renormalization tail.
    AffMap F = phi_lAB(nf, ell, 0, 0);
    F.xs.f2 = Fn2::constant(0.0); // strip eta, the tail re-derives the gauge
    MetricSpec pulled = pullback_spec(nf.to_spec(), F, Theta::rational(0, 1), 1e-9,
                                      std::max(48, 4 * nf.mu.max_z + 8 * std::abs(ell)));
    NormalFormClosed out = renormalize(pulled, [&](const MetricSpec& m) {
        NormalFormClosed r;
        r.n = nf.n;
        r.Lambda = m.Lambda;
        r.L2 = fiber_mean(m.L2, 'y').trimmed(1e-13);
        r.k = (nf.n != 0) ? 0.0 : mean(m.nu);
        r.mu = m.mu.trimmed(1e-13);
        r.arith = nf.arith;
        return r;
    });
    out.validate();
    return out;
}

NormalFormClosed act_signs_closed(const NormalFormClosed& nf, int e1, int e2) {
    // n = 0: (e1 x, e2 y, e1 z) preserves Lambda; n != 0: only (-x,-y,-z).
    NormalFormClosed out = nf;
    if (nf.n != 0) {
        if (!(e1 == -1 && e2 == -1) && !(e1 == 1 && e2 == 1))
            throw MalformedInput("n != 0 allows only the total flip");
        if (e1 == 1) return nf;
        out.L2 = nf.L2.reflected();
        out.mu = nf.mu.reflected(true, true);
    } else {
        out.L2 = (e1 < 0) ? nf.L2.reflected() : nf.L2;
        out.mu = nf.mu.reflected(e2 < 0, e1 < 0);
        out.k = e1 * e2 * nf.k;
    }
    // restore ranges
    MetricSpec s = out.to_spec();
    return renormalize(s, [&](const MetricSpec& m) {
        NormalFormClosed r;
        r.n = nf.n;
        r.Lambda = m.Lambda;
        r.L2 = fiber_mean(m.L2, 'y').trimmed(1e-13);
        r.k = (nf.n != 0) ? 0.0 : mean(m.nu);
        r.mu = m.mu.trimmed(1e-13);
        r.arith = nf.arith;
        return r;
    });
}

NormalFormDio act_translation(const NormalFormDio& nf, double y0, double z0) {
    NormalFormDio out = nf;
    out.mu = nf.mu.shifted(y0, z0);
    return out;
}

NormalFormClosed act_translation(const NormalFormClosed& nf, double y0, double z0) {
    NormalFormClosed out = nf;
    out.L2 = nf.L2.shifted(z0);
    out.mu = nf.mu.shifted(y0, z0);
    return out;
}

// ------------------------------ isometry test -------------------------------

namespace {

bool theta_equal(const Theta& a, const Theta& b, double tol = 1e-12) {
    if (a.kind == Theta::Kind::rational && b.kind == Theta::Kind::rational)
        return a.rat == b.rat;
    return std::abs(a.value() - b.value()) < tol;
}

// Does mu2(y,z) == mu1(y + y0, z + z0) for some torus translation (continuous
// search by coarse grid + refinement on the trig-polynomial mismatch)?
bool translation_match_2d(const Fn2& mu1, const Fn2& mu2, double tol, double* y0_out = nullptr,
                          double* z0_out = nullptr, bool discrete = false, int nmod = 1) {
    double best = 1e300, by = 0, bz = 0;
    auto mismatch = [&](double y0, double z0) {
        return (mu1.shifted(y0, z0) - mu2).max_abs_coeff();
    };
    if (discrete) {
        for (int p = 0; p < nmod; ++p)
            for (int q = 0; q < nmod; ++q) {
                double v = mismatch(static_cast<double>(p) / nmod, static_cast<double>(q) / nmod);
                if (v < best) {
                    best = v;
                    by = static_cast<double>(p) / nmod;
                    bz = static_cast<double>(q) / nmod;
                }
            }
    } else {
        int G = 48;
        double cy = 0, cz = 0, span = 1.0;
        for (int level = 0; level < 6; ++level) {
            double lbest = 1e300, lby = cy, lbz = cz;
            for (int i = 0; i < G; ++i)
                for (int j = 0; j < G; ++j) {
                    double y0 = cy + span * (static_cast<double>(i) / G - 0.5);
                    double z0 = cz + span * (static_cast<double>(j) / G - 0.5);
                    double v = mismatch(y0, z0);
                    if (v < lbest) {
                        lbest = v;
                        lby = y0;
                        lbz = z0;
                    }
                }
            cy = lby;
            cz = lbz;
            span = 2.0 * span / G;
            best = lbest;
            if (best < tol * 0.01) break;
        }
        by = cy;
        bz = cz;
    }
    if (best < tol) {
        if (y0_out) *y0_out = by;
        if (z0_out) *z0_out = bz;
        return true;
    }
    return false;
}

} // namespace

IsometryDecision are_isometric(const NormalFormDio& a, const NormalFormDio& b,
                               const IsometrySearchBounds& bounds) {
    a.validate();
    b.validate();
    if (a.n != b.n) return {IsometryDecision::Kind::not_isometric, "different Euler numbers"};
    // invariant pre-filter for n != 0: (Lambda, L) are invariants of the family
    if (a.n != 0) {
        if (std::abs(a.Lambda - b.Lambda) > bounds.tol)
            return {IsometryDecision::Kind::not_isometric, "Lambda differs (n != 0 invariant)"};
        if (std::abs(a.L - b.L) > bounds.tol)
            return {IsometryDecision::Kind::not_isometric, "L differs (n != 0 invariant)"};
    }
    // search GL2 with bounded entries x sign flips x translations; the cheap
    // slope test prunes almost every matrix before the heavy action runs
    for (long m11 = -bounds.m_max; m11 <= bounds.m_max; ++m11)
        for (long m12 = -bounds.m_max; m12 <= bounds.m_max; ++m12)
            for (long m21 = -bounds.m_max; m21 <= bounds.m_max; ++m21)
                for (long m22 = -bounds.m_max; m22 <= bounds.m_max; ++m22) {
                    long det = m11 * m22 - m12 * m21;
                    if (det != 1 && det != -1) continue;
                    Theta theta_m = a.theta;
                    try {
                        theta_m = a.theta.moebius(m11, m12, m21, m22);
                    } catch (const Error&) {
                        continue;
                    }
                    if (!theta_equal(theta_m, b.theta, 1e-10) &&
                        !theta_equal(theta_m.negated(), b.theta, 1e-10))
                        continue;
                    NormalFormDio cand;
                    try {
                        cand = act_gl2(a, m11, m12, m21, m22);
                    } catch (const Error&) {
                        continue;
                    }
                    for (int e2 : {1, -1})
                        for (int e3 : {1, -1}) {
                            NormalFormDio f;
                            try {
                                if (cand.n == 0)
                                    f = act_signs_dio(cand, e2, e2, e3);
                                else
                                    f = act_signs_dio(cand, e2 * e3, e2, e3);
                            } catch (const Error&) {
                                continue;
                            }
                            // restore ranges after the flip
                            try {
                                f = renormalize(f.to_spec(), [&](const MetricSpec& m) {
                                    NormalFormDio r = f;
                                    r.Lambda = m.Lambda;
                                    r.k = (f.n != 0) ? 0.0 : mean(m.nu);
                                    r.mu = m.mu.trimmed(1e-14);
                                    return r;
                                });
                            } catch (const Error&) {
                                continue;
                            }
                            if (!theta_equal(f.theta, b.theta, 1e-10)) continue;
                            if (std::abs(f.Lambda - b.Lambda) > bounds.tol) continue;
                            if (std::abs(f.L - b.L) > bounds.tol) continue;
                            if (std::abs(f.k - b.k) > bounds.tol) continue;
                            bool ok = (a.n == 0)
                                          ? translation_match_2d(f.mu, b.mu, bounds.tol)
                                          : translation_match_2d(f.mu, b.mu, bounds.tol,
                                                                 nullptr, nullptr, true, a.n);
                            if (ok) {
                                std::string w = "gl2(" + std::to_string(m11) + "," +
                                                std::to_string(m12) + "," + std::to_string(m21) +
                                                "," + std::to_string(m22) + ") signs(" +
                                                std::to_string(e2) + "," + std::to_string(e3) +
                                                ") + translation";
                                return {IsometryDecision::Kind::isometric, w};
                            }
                        }
                }
    // identity matrix was part of the search; beyond the bound we cannot decide
    if (a.n != 0) {
        // for n != 0 the remaining freedom is compact: exhausted, so decide
        return {IsometryDecision::Kind::not_isometric,
                "no witness in the residual compact family"};
    }
    return {IsometryDecision::Kind::undecided,
            "no witness with GL2 entries up to " + std::to_string(bounds.m_max)};
}

IsometryDecision are_isometric(const NormalFormClosed& a, const NormalFormClosed& b,
                               const IsometrySearchBounds& bounds) {
    a.validate();
    b.validate();
    if (a.n != b.n) return {IsometryDecision::Kind::not_isometric, "different Euler numbers"};
    if (std::abs(a.Lambda - b.Lambda) > bounds.tol)
        return {IsometryDecision::Kind::not_isometric, "Lambda differs"};
    if (std::abs(a.Lcal() - b.Lcal()) > 1e-6)
        return {IsometryDecision::Kind::not_isometric, "Lcal differs"};
    for (int ell = -bounds.ell_max; ell <= bounds.ell_max; ++ell) {
        NormalFormClosed cand;
        try {
            cand = act_Z(a, ell);
        } catch (const Error&) {
            continue;
        }
        std::vector<std::pair<int, int>> flips;
        if (a.n == 0)
            flips = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
        else
            flips = {{1, 1}, {-1, -1}};
        for (auto [e1, e2] : flips) {
            NormalFormClosed f;
            try {
                f = act_signs_closed(cand, e1, e2);
            } catch (const Error&) {
                continue;
            }
            if (std::abs(f.k - b.k) > bounds.tol) continue;
            // z-translation must match L; then mu must match with the same z0
            if (a.n == 0) {
                // continuous: search z0 aligning L2, then y0 for mu
                bool okL = false;
                double z0 = 0;
                if (f.L2.is_constant(1e-12) && b.L2.is_constant(1e-12)) {
                    okL = std::abs(f.L2.mean() - b.L2.mean()) < bounds.tol;
                } else {
                    Fn2 l1 = Fn2::from_1d_z(f.L2), l2 = Fn2::from_1d_z(b.L2);
                    okL = translation_match_2d(l1, l2, bounds.tol, nullptr, &z0);
                }
                if (!okL) continue;
                Fn2 shifted = f.mu.shifted(0.0, z0);
                if (translation_match_2d(shifted, b.mu, bounds.tol)) {
                    return {IsometryDecision::Kind::isometric,
                            "ell=" + std::to_string(ell) + " signs(" + std::to_string(e1) + "," +
                                std::to_string(e2) + ") + translation"};
                }
            } else {
                bool found = false;
                for (int p = 0; p < a.n && !found; ++p)
                    for (int q = 0; q < a.n && !found; ++q) {
                        double y0 = static_cast<double>(p) / a.n;
                        double z0 = static_cast<double>(q) / a.n;
                        if ((f.L2.shifted(z0) - b.L2).max_abs_coeff() > bounds.tol) continue;
                        if ((f.mu.shifted(y0, z0) - b.mu).max_abs_coeff() > bounds.tol)
                            continue;
                        found = true;
                    }
                if (found)
                    return {IsometryDecision::Kind::isometric,
                            "ell=" + std::to_string(ell) + " flip + (1/n)Z^2 translation"};
            }
        }
    }
    return {IsometryDecision::Kind::undecided,
            "no witness with |ell| <= " + std::to_string(bounds.ell_max)};
}

} // namespace lolight
