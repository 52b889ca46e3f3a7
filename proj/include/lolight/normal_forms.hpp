#pragma once

#include "lolight/model.hpp"

namespace lolight {

// Normal form of the Diophantine-slope family: L constant, nu = k constant,
// k in [0, Lambda) (0 when n != 0), fiber mean of mu constant in [0, 2 Lambda)
// (identically 0 when n != 0).
struct NormalFormDio {
    int n = 0;
    Theta theta = Theta::golden();
    double Lambda = 1.0;
    double L = 1.0;
    double k = 0.0;
    Fn2 mu;
    ArithCertificates arith;

    MetricSpec to_spec() const;
    void validate() const;
};

// Normal form of the closed-leaf family (theta = 0 chart): L = L(z) with the
// L^2 entry stored, k in [0, Lambda) (0 when n != 0), fiber mean of mu
// constant in [0, 2 Lambda) (0 when n != 0).
struct NormalFormClosed {
    int n = 0;
    double Lambda = 1.0;
    double k = 0.0;
    Fn1 L2 = Fn1::constant(1.0);
    Fn2 mu;
    ArithCertificates arith;

    MetricSpec to_spec() const;
    void validate() const;

    // Lcal = 1 / int_0^1 L^{-2}; H(z) = Lcal int_0^z L^{-2} = z + H_per(z).
    double Lcal(int band = 48) const;
    // periodic part of H with H_per(0) = 0.
    Fn1 H_periodic_part(int band = 48) const;
};

} // namespace lolight
