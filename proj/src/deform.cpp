#include "lolight/deform.hpp"

#include <cmath>

namespace lolight {

MetricSpec deform_path(const NormalFormClosed& nf, double t) {
    if (t < 0.0 || t > 1.0) throw MalformedInput("deformation parameter t must be in [0,1]");
    MetricSpec s = nf.to_spec();
    s.L2 = Fn2::from_1d_z(nf.L2 * t + Fn1::constant(1.0 - t));
    s.mu = nf.mu * t;
    for (int i = 0; i < 64; ++i)
        if (s.L2(0.0, i / 64.0) <= 0.0)
            throw PositivityLoss("L^2_t lost positivity"); // cannot occur for L^2 > 0
    return s;
}

MetricSpec deform_path_dio(const NormalFormDio& nf, double t) {
    if (t < 0.0 || t > 1.0) throw MalformedInput("deformation parameter t must be in [0,1]");
    MetricSpec s = nf.to_spec();
    s.L2 = Fn2::constant((1.0 - t) + t * nf.L * nf.L);
    s.mu = nf.mu * t;
    return s;
}

namespace {

std::vector<PathDefect> verify_path(const std::function<MetricSpec(double)>& path,
                                    const AffMap& map, const std::vector<double>& ts,
                                    double tol, int grid_n) {
    std::vector<PathDefect> out;
    for (double t : ts) {
        MetricSpec st = path(t);
        AffineDefect d = affine_defect(st, map, grid_n);
        if (d.residual > tol || d.C_spread > tol)
            throw VerificationFailed("affine defect not constant along the path at t = " +
                                     std::to_string(t) + " (residual " +
                                     std::to_string(std::max(d.residual, d.C_spread)) + ")");
        out.push_back({t, d});
    }
    return out;
}

} // namespace

std::vector<PathDefect> verify_along_path(const NormalFormClosed& nf, const AffMap& map,
                                          const std::vector<double>& t_samples, double tol,
                                          int grid_n) {
    return verify_path([&](double t) { return deform_path(nf, t); }, map, t_samples, tol,
                       grid_n);
}

std::vector<PathDefect> verify_along_path_dio(const NormalFormDio& nf, const AffMap& map,
                                              const std::vector<double>& t_samples, double tol,
                                              int grid_n) {
    return verify_path([&](double t) { return deform_path_dio(nf, t); }, map, t_samples, tol,
                       grid_n);
}

// ------------------------------- case (iv) ----------------------------------

namespace {
double defect_reference(const CaseIvFamily& f) {
    return affine_defect_field(f.metric_at(1.0), f.chi, 10).C;
}
} // namespace

MetricField CaseIvFamily::metric_at(double t) const {
    CaseIvFamily f = *this; // capture by value
    return [f, t](const Vec3& p) {
        double z = p[2];
        double L2z = f.L2(z);
        double Hp = 1.0 + f.Hper.derivative()(z); // H'(z) = Lcal / L^2
        // m(w) = mtilde(H^{-1}(w)): dm/dz vs dm/dw differ by 1/H'
        double mtilde_d = (f.B * f.Hper.derivative()(z) + f.eta.derivative()(z)) /
                          static_cast<double>(f.A);
        double mprime_w = mtilde_d / Hp;
        // h-profiles at w = H(z), evaluated through z
        double h22 = (1.0 - t) + t * L2z;
        double h13 = f.rho * h22;
        double h23 = f.q23 * h22 * h22 + f.l23 * h22;
        double h33_full =
            mprime_w * mprime_w * L2z + 2.0 * mprime_w * f.k / Hp + f.mu0 / (Hp * Hp);
        double h33 = t * h33_full;
        // h matrix in the straightened (x, y, w) chart (n = 0)
        Mat3 h;
        h(0, 2) = h(2, 0) = h13;
        h(1, 1) = h22;
        h(1, 2) = h(2, 1) = h23;
        h(2, 2) = h33;
        // g_t = (Ginv)^* h_t with Ginv = (x, y - mtilde(z), H(z))
        Mat3 J;
        J(0, 0) = 1;
        J(1, 1) = 1;
        J(1, 2) = -mtilde_d;
        J(2, 2) = Hp;
        return J.transposed() * h * J;
    };
}

AffineDefect CaseIvFamily::defect_at(double t, int grid_n) const {
    return affine_defect_field(metric_at(t), chi, grid_n);
}

MetricSpec CaseIvFamily::flat_endpoint_spec() const {
    MetricSpec s;
    s.lattice = Lattice::gamma(0);
    s.Lambda = rho; // h13 at t = 0, where h22 = 1
    s.L2 = Fn2::constant(1.0);
    s.nu = Fn2::constant(q23 + l23);
    s.mu = Fn2::constant(0.0);
    return s;
}

CaseIvFamily case_iv_family(const NormalFormClosed& nf) {
    if (nf.n != 0)
        throw IncompatibleNormalForm(
            "case-(iv) family implemented for n = 0 (the n != 0 mu = const forms are the "
            "case-9 flow metrics, covered by the generic path)");
    if (!nf.mu.is_constant(1e-12))
        throw IncompatibleNormalForm("case-(iv) family requires constant mu");
    if (nf.arith.Lcal_over_Lambda.kind != CertValue::Kind::rational)
        throw CertificateMissing("case-(iv) family requires the Lcal certificate");

    CaseIvFamily f;
    Rational r = nf.arith.Lcal_over_Lambda.value;
    f.ell = static_cast<int>(r.q);
    f.A = -static_cast<int>(r.p);
    f.B = 0;
    f.Lambda = nf.Lambda;
    f.k = nf.k;
    f.mu0 = mean(nf.mu);
    f.L2 = nf.L2;
    f.Hper = nf.H_periodic_part();
    f.eta = eta_of(nf, f.ell);
    f.chi = make_generator("chi", {}, nf);

    double Lcal = nf.Lcal();
    f.rho = f.Lambda / Lcal; // h13 / h22

    // h23 = q23 h22^2 + l23 h22; fit at two heights, verify elsewhere (the
    // fit is exact precisely because chi is affine)
    auto h23_of = [&](double z) {
        double Hp = 1.0 + f.Hper.derivative()(z);
        double mtd = (f.B * f.Hper.derivative()(z) + f.eta.derivative()(z)) /
                     static_cast<double>(f.A);
        return (mtd / Hp) * f.L2(z) + f.k / Hp;
    };
    double z1 = 0.13, z2 = 0.57;
    double a1 = f.L2(z1), a2 = f.L2(z2);
    double b1 = h23_of(z1), b2 = h23_of(z2);
    if (std::abs(a1 - a2) < 1e-8) {
        f.q23 = 0.0; // L constant: h23 is linear in h22
        f.l23 = b1 / a1;
    } else {
        f.q23 = (b1 / a1 - b2 / a2) / (a1 - a2);
        f.l23 = b1 / a1 - f.q23 * a1;
    }
    for (double z : {0.03, 0.31, 0.72, 0.9}) {
        double a = f.L2(z);
        if (std::abs(f.q23 * a * a + f.l23 * a - h23_of(z)) > 1e-7)
            throw VerificationFailed("case-(iv) h23 profile is not quadratic in h22");
    }
    f.C0 = defect_reference(f);
    return f;
}

} // namespace lolight
