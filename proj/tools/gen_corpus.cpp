// Regenerates the bundled example specs (specs/*.json). The corpus covers the
// two torus families and the nine Aff/Isom cases plus one spec whose
// classification is blocked on a missing certificate.
#include <fstream>
#include <iostream>

#include "lolight/json_io.hpp"

using namespace lolight;

namespace {

void write(const std::string& dir, const std::string& name, const MetricSpec& spec) {
    io::json j = io::to_json(spec);
    std::ofstream out(dir + "/" + name + ".json");
    out << j.dump(2) << "\n";
    std::cout << name << ".json written\n";
}

Fn1 profile_2_sin2pz() { return Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 1.0); }

} // namespace

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "specs";

    { // case 1a: torus, X-closure = X-perp leaves, L(z) profile
        MetricSpec s;
        s.lattice = Lattice::torusA(std::sqrt(2.0) - 1.0, 0.25, 0.0);
        s.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.3, 0.0));
        write(dir, "case1a_torusA", s);
    }
    { // case 1b: torus, transverse closure, mu(y) profile
        MetricSpec s;
        s.lattice = Lattice::torusB(std::sqrt(3.0) - 1.0, 0.0, 0.5);
        s.mu = Fn2::from_1d_y(Fn1::harmonic(1, 0.4, 0.0));
        write(dir, "case1b_torusB", s);
    }
    { // case 2: Diophantine slope, mu mixing y and z
        MetricSpec s = MetricSpec::flat(1, 1.0);
        s.theta = Theta::golden();
        s.mu = Fn2::harmonic(1, 1, 0.3, 0.0);
        write(dir, "case2_dio_generic", s);
    }
    { // case 3: mu(y) only, parabolic torus
        MetricSpec s = MetricSpec::flat(2, 1.0);
        s.theta = Theta::golden();
        s.mu = Fn2::harmonic(1, 0, 0.5, 0.0);
        write(dir, "case3_dio_muy", s);
    }
    { // case 4: closed leaves, no extra structure
        MetricSpec s = MetricSpec::flat(1, 1.0);
        s.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(1, 0.0, 0.3));
        s.mu = Fn2::harmonic(1, 0, 0.2, 0.0) + Fn2::harmonic(1, 1, 0.04, 0.0) +
               Fn2::harmonic(1, -1, 0.04, 0.0);
        s.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
        write(dir, "case4_closed_generic", s);
    }
    { // case 5: (L, mu) invariant under (y + 1/2, z + 1/2), declared period
        MetricSpec s = MetricSpec::flat(2, 1.0);
        s.L2 = Fn2::from_1d_z(Fn1::constant(2.0) + Fn1::harmonic(2, 0.4, 0.0));
        s.mu = Fn2::harmonic(2, -2, 0.3, 0.0);
        s.arith.period = std::make_pair(2, 1);
        s.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
        write(dir, "case5_closed_period", s);
    }
    { // case 6: mu constant, Lcal and k both rational multiples of Lambda
        MetricSpec s = MetricSpec::flat(0, std::sqrt(3.0));
        s.L2 = Fn2::from_1d_z(profile_2_sin2pz()); // Lcal = sqrt(3) = Lambda
        s.nu = Fn2::constant(std::sqrt(3.0) / 3.0);
        s.mu = Fn2::constant(0.7);
        s.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
        s.arith.k_over_Lambda = {CertValue::Kind::rational, Rational(1, 3)};
        write(dir, "case6_closed_rational", s);
    }
    { // case 7: mu constant, Lcal rational, k irrational
        MetricSpec s = MetricSpec::flat(0, std::sqrt(3.0));
        s.L2 = Fn2::from_1d_z(profile_2_sin2pz());
        s.nu = Fn2::constant((std::sqrt(2.0) - 1.0) * std::sqrt(3.0));
        s.mu = Fn2::constant(0.5);
        s.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
        s.arith.k_over_Lambda = {CertValue::Kind::irrational, Rational()};
        write(dir, "case7_closed_mixed", s);
    }
    { // case 8: flat parabolic torus, irrational slope
        MetricSpec s = MetricSpec::flat(1, 1.0);
        s.theta = Theta::golden();
        write(dir, "case8_dio_flat", s);
    }
    { // case 9: L(z) profile with the affine Y-flow
        MetricSpec s = MetricSpec::flat(2, 1.0);
        s.L2 = Fn2::from_1d_z(profile_2_sin2pz());
        s.arith.Lcal_over_Lambda = {CertValue::Kind::irrational, Rational()};
        write(dir, "case9_closed_flow", s);
    }
    { // undecided: the k-rationality branch is reached without a certificate
        MetricSpec s = MetricSpec::flat(0, std::sqrt(3.0));
        s.L2 = Fn2::from_1d_z(profile_2_sin2pz());
        s.nu = Fn2::constant(std::sqrt(3.0) / 5.0);
        s.mu = Fn2::constant(0.3);
        s.arith.Lcal_over_Lambda = {CertValue::Kind::rational, Rational(1, 1)};
        write(dir, "undecided_missing_cert", s);
    }
    return 0;
}
