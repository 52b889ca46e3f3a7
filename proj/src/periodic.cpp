#include "lolight/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lolight {

namespace {

inline void sincos2pi(double t, double& s, double& c) {
    s = std::sin(TWO_PI * t);
    c = std::cos(TWO_PI * t);
}

// Reduce j*theta modulo 1 with exact arithmetic when the slope is rational.
double frac_mult(const Theta& theta, long j) {
    if (theta.kind == Theta::Kind::rational) {
        long long r = (static_cast<long long>(j) * theta.rat.p) % theta.rat.q;
        if (r < 0) r += theta.rat.q;
        return static_cast<double>(r) / static_cast<double>(theta.rat.q);
    }
    double t = std::fmod(static_cast<double>(j) * theta.value(), 1.0);
    if (t < 0) t += 1.0;
    return t;
}

} // namespace

// ------------------------------- Fn1 ---------------------------------------

Fn1 Fn1::harmonic(int j, double ca, double cb) {
    Fn1 f(j);
    f.a[j] += ca;
    if (j == 0) {
        if (cb != 0.0) throw MalformedInput("sin coefficient at frequency 0");
    } else {
        f.b[j] += cb;
    }
    return f;
}

double Fn1::operator()(double z) const {
    double r = a[0];
    for (int j = 1; j <= max_freq; ++j) {
        double s, c;
        sincos2pi(std::fmod(static_cast<double>(j) * z, 1.0), s, c);
        r += a[j] * c + b[j] * s;
    }
    return r;
}

bool Fn1::is_constant(double tol) const {
    for (int j = 1; j <= max_freq; ++j)
        if (std::abs(a[j]) > tol || std::abs(b[j]) > tol) return false;
    return true;
}

Fn1 Fn1::derivative() const {
    Fn1 r(max_freq);
    for (int j = 1; j <= max_freq; ++j) {
        r.a[j] = TWO_PI * j * b[j];
        r.b[j] = -TWO_PI * j * a[j];
    }
    return r;
}

Fn1 Fn1::antiderivative_mean_zero() const {
    Fn1 r(max_freq);
    for (int j = 1; j <= max_freq; ++j) {
        r.a[j] = -b[j] / (TWO_PI * j);
        r.b[j] = a[j] / (TWO_PI * j);
    }
    return r;
}

Fn1 Fn1::operator+(const Fn1& o) const {
    Fn1 r(std::max(max_freq, o.max_freq));
    for (int j = 0; j <= r.max_freq; ++j) {
        r.a[j] = (j <= max_freq ? a[j] : 0.0) + (j <= o.max_freq ? o.a[j] : 0.0);
        r.b[j] = (j <= max_freq ? b[j] : 0.0) + (j <= o.max_freq ? o.b[j] : 0.0);
    }
    return r;
}

Fn1 Fn1::operator-(const Fn1& o) const { return *this + o * -1.0; }

Fn1 Fn1::operator*(double s) const {
    Fn1 r = *this;
    for (auto& v : r.a) v *= s;
    for (auto& v : r.b) v *= s;
    return r;
}

Fn1 Fn1::operator*(const Fn1& o) const {
    Fn1 r(max_freq + o.max_freq);
    for (int j1 = 0; j1 <= max_freq; ++j1)
        for (int j2 = 0; j2 <= o.max_freq; ++j2) {
            double a1 = a[j1], b1 = b[j1], a2 = o.a[j2], b2 = o.b[j2];
            if (a1 == 0 && b1 == 0) continue;
            int js = j1 + j2, jd = j1 - j2;
            // product-to-sum identities
            double as = 0.5 * (a1 * a2 - b1 * b2);
            double bs = 0.5 * (a1 * b2 + b1 * a2);
            double ad = 0.5 * (a1 * a2 + b1 * b2);
            double bd = 0.5 * (b1 * a2 - a1 * b2); // sin((j1-j2)z) coefficient
            if (js == 0) {
                r.a[0] += as;
            } else {
                r.a[js] += as;
                r.b[js] += bs;
            }
            if (jd == 0) {
                r.a[0] += ad;
            } else if (jd > 0) {
                r.a[jd] += ad;
                r.b[jd] += bd;
            } else {
                r.a[-jd] += ad;
                r.b[-jd] -= bd;
            }
        }
    return r;
}

Fn1 Fn1::shifted(double dz) const {
    Fn1 r(max_freq);
    r.a[0] = a[0];
    for (int j = 1; j <= max_freq; ++j) {
        double s, c;
        sincos2pi(std::fmod(static_cast<double>(j) * dz, 1.0), s, c);
        // cos(X + phi), sin(X + phi) expansion with phi = 2 pi j dz
        r.a[j] = a[j] * c + b[j] * s;
        r.b[j] = -a[j] * s + b[j] * c;
    }
    return r;
}

Fn1 Fn1::reflected() const {
    Fn1 r = *this;
    for (int j = 1; j <= max_freq; ++j) r.b[j] = -b[j];
    return r;
}

Fn1 Fn1::rescaled_argument(int m) const {
    if (m == 0) throw MalformedInput("rescaled_argument with m = 0");
    int am = std::abs(m);
    Fn1 r(max_freq * am);
    r.a[0] = a[0];
    for (int j = 1; j <= max_freq; ++j) {
        r.a[j * am] = a[j];
        r.b[j * am] = (m > 0 ? b[j] : -b[j]);
    }
    return r;
}

double Fn1::max_abs_coeff() const {
    double r = 0;
    for (double v : a) r = std::max(r, std::abs(v));
    for (double v : b) r = std::max(r, std::abs(v));
    return r;
}

Fn1 Fn1::trimmed(double tol) const {
    int mf = 0;
    for (int j = max_freq; j >= 1; --j)
        if (std::abs(a[j]) > tol || std::abs(b[j]) > tol) {
            mf = j;
            break;
        }
    Fn1 r(mf);
    for (int j = 0; j <= mf; ++j) {
        r.a[j] = a[j];
        r.b[j] = b[j];
    }
    r.b[0] = 0.0;
    return r;
}

Fn1 project1(const std::function<double(double)>& f, int max_freq, int oversample) {
    int P = std::max(64, oversample * 2 * (max_freq + 1));
    std::vector<double> samples(P);
    for (int m = 0; m < P; ++m) samples[m] = f(static_cast<double>(m) / P);
    Fn1 r(max_freq);
    for (int j = 0; j <= max_freq; ++j) {
        double ca = 0, cb = 0;
        for (int m = 0; m < P; ++m) {
            double s, c;
            sincos2pi(std::fmod(static_cast<double>(j) * m / P, 1.0), s, c);
            ca += samples[m] * c;
            cb += samples[m] * s;
        }
        double norm = (j == 0 ? 1.0 : 2.0) / P;
        r.a[j] = ca * norm;
        if (j > 0) r.b[j] = cb * norm;
    }
    return r;
}

Fn1 reciprocal(const Fn1& f, int max_freq, int oversample) {
    return project1([&](double z) { return 1.0 / f(z); }, max_freq, oversample).trimmed(1e-14);
}

Fn1 sqrt_fn(const Fn1& f, int max_freq, int oversample) {
    return project1([&](double z) { return std::sqrt(f(z)); }, max_freq, oversample)
        .trimmed(1e-14);
}

// ------------------------------- Fn2 ---------------------------------------

Fn2::Fn2(int my, int mz) : max_y(my), max_z(mz) {
    std::size_t n = static_cast<std::size_t>(mz + 1) +
                    static_cast<std::size_t>(my) * (2 * mz + 1);
    a.assign(n, 0.0);
    b.assign(n, 0.0);
}

Fn2 Fn2::harmonic(int j, int k, double ca, double cb) {
    // Canonicalize the requested mode first.
    if (j < 0 || (j == 0 && k < 0)) {
        j = -j;
        k = -k;
        cb = -cb;
    }
    Fn2 f(j, std::abs(k));
    f.add_mode(j, k, ca, cb);
    return f;
}

Fn2 Fn2::from_1d_z(const Fn1& g) {
    Fn2 f(0, g.max_freq);
    for (int k = 0; k <= g.max_freq; ++k) {
        f.a[f.index(0, k)] = g.a[k];
        f.b[f.index(0, k)] = g.b[k];
    }
    return f;
}

Fn2 Fn2::from_1d_y(const Fn1& g) {
    Fn2 f(g.max_freq, 0);
    for (int j = 0; j <= g.max_freq; ++j) {
        f.a[f.index(j, 0)] = g.a[j];
        f.b[f.index(j, 0)] = g.b[j];
    }
    return f;
}

std::size_t Fn2::index(int j, int k) const {
    if (j == 0) return static_cast<std::size_t>(k);
    return static_cast<std::size_t>(max_z + 1) +
           static_cast<std::size_t>(j - 1) * (2 * max_z + 1) +
           static_cast<std::size_t>(k + max_z);
}

bool Fn2::in_range(int j, int k) const {
    if (j == 0) return k >= 0 && k <= max_z;
    return j >= 1 && j <= max_y && k >= -max_z && k <= max_z;
}

double Fn2::coeff_a(int j, int k) const {
    if (j < 0 || (j == 0 && k < 0)) {
        j = -j;
        k = -k;
    }
    if (!in_range(j, k)) return 0.0;
    return a[index(j, k)];
}

double Fn2::coeff_b(int j, int k) const {
    double sign = 1.0;
    if (j < 0 || (j == 0 && k < 0)) {
        j = -j;
        k = -k;
        sign = -1.0;
    }
    if (!in_range(j, k)) return 0.0;
    return sign * b[index(j, k)];
}

void Fn2::add_mode(int j, int k, double ca, double cb) {
    if (j < 0 || (j == 0 && k < 0)) {
        j = -j;
        k = -k;
        cb = -cb;
    }
    if (!in_range(j, k)) throw MalformedInput("Fn2 mode out of range");
    a[index(j, k)] += ca;
    if (j == 0 && k == 0) {
        if (std::abs(cb) > 0.0) throw MalformedInput("sin coefficient at mode (0,0)");
    } else {
        b[index(j, k)] += cb;
    }
}

double Fn2::operator()(double y, double z) const {
    double r = 0;
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (a[idx] == 0 && b[idx] == 0) continue;
            double t = std::fmod(static_cast<double>(j) * y + static_cast<double>(k) * z, 1.0);
            double s, c;
            sincos2pi(t, s, c);
            r += a[idx] * c + b[idx] * s;
        }
    }
    return r;
}

bool Fn2::is_constant(double tol) const {
    for (std::size_t i = 1; i < a.size(); ++i)
        if (std::abs(a[i]) > tol || std::abs(b[i]) > tol) return false;
    return std::abs(b[0]) <= tol;
}

bool Fn2::depends_on_y(double tol) const {
    for (int j = 1; j <= max_y; ++j)
        for (int k = -max_z; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (std::abs(a[idx]) > tol || std::abs(b[idx]) > tol) return true;
        }
    return false;
}

bool Fn2::depends_on_z(double tol) const {
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 1 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            if (k == 0) continue;
            std::size_t idx = index(j, k);
            if (std::abs(a[idx]) > tol || std::abs(b[idx]) > tol) return true;
        }
    }
    return false;
}

Fn2 Fn2::d_dy() const {
    Fn2 r(max_y, max_z);
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            if (j == 0) continue;
            std::size_t idx = index(j, k);
            r.a[idx] = TWO_PI * j * b[idx];
            r.b[idx] = -TWO_PI * j * a[idx];
        }
    }
    return r;
}

Fn2 Fn2::d_dz() const {
    Fn2 r(max_y, max_z);
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            if (j == 0 && k == 0) continue;
            std::size_t idx = index(j, k);
            r.a[idx] = TWO_PI * k * b[idx];
            r.b[idx] = -TWO_PI * k * a[idx];
        }
    }
    return r;
}

Fn2 Fn2::operator+(const Fn2& o) const {
    Fn2 r(std::max(max_y, o.max_y), std::max(max_z, o.max_z));
    for (int j = 0; j <= r.max_y; ++j) {
        int kmin = (j == 0 ? 0 : -r.max_z);
        for (int k = kmin; k <= r.max_z; ++k) {
            std::size_t idx = r.index(j, k);
            r.a[idx] = coeff_a(j, k) + o.coeff_a(j, k);
            r.b[idx] = coeff_b(j, k) + o.coeff_b(j, k);
        }
    }
    r.b[0] = 0.0;
    return r;
}

Fn2 Fn2::operator-(const Fn2& o) const { return *this + o * -1.0; }

Fn2 Fn2::operator*(double s) const {
    Fn2 r = *this;
    for (auto& v : r.a) v *= s;
    for (auto& v : r.b) v *= s;
    return r;
}

Fn2 Fn2::operator+(double cst) const {
    Fn2 r = *this;
    r.a[0] += cst;
    return r;
}

Fn2 Fn2::operator*(const Fn2& o) const {
    Fn2 r(max_y + o.max_y, max_z + o.max_z);
    for (int j1 = 0; j1 <= max_y; ++j1) {
        int k1min = (j1 == 0 ? 0 : -max_z);
        for (int k1 = k1min; k1 <= max_z; ++k1) {
            std::size_t i1 = index(j1, k1);
            double a1 = a[i1], b1 = b[i1];
            if (a1 == 0 && b1 == 0) continue;
            for (int j2 = 0; j2 <= o.max_y; ++j2) {
                int k2min = (j2 == 0 ? 0 : -o.max_z);
                for (int k2 = k2min; k2 <= o.max_z; ++k2) {
                    std::size_t i2 = o.index(j2, k2);
                    double a2 = o.a[i2], b2 = o.b[i2];
                    if (a2 == 0 && b2 == 0) continue;
                    // sum mode
                    r.add_mode(j1 + j2, k1 + k2, 0.5 * (a1 * a2 - b1 * b2),
                               (j1 + j2 == 0 && k1 + k2 == 0)
                                   ? 0.0
                                   : 0.5 * (a1 * b2 + b1 * a2));
                    // difference mode
                    int jd = j1 - j2, kd = k1 - k2;
                    r.add_mode(jd, kd, 0.5 * (a1 * a2 + b1 * b2),
                               (jd == 0 && kd == 0) ? 0.0 : 0.5 * (b1 * a2 - a1 * b2));
                }
            }
        }
    }
    return r;
}

Fn2 Fn2::shifted(double dy, double dz) const {
    Fn2 r(max_y, max_z);
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (a[idx] == 0 && b[idx] == 0) continue;
            double t = std::fmod(static_cast<double>(j) * dy + static_cast<double>(k) * dz, 1.0);
            double s, c;
            sincos2pi(t, s, c);
            r.a[idx] = a[idx] * c + b[idx] * s;
            r.b[idx] = (j == 0 && k == 0) ? 0.0 : -a[idx] * s + b[idx] * c;
        }
    }
    return r;
}

Fn2 Fn2::reflected(bool flip_y, bool flip_z) const {
    double sy = flip_y ? -1.0 : 1.0;
    double sz = flip_z ? -1.0 : 1.0;
    Fn2 r(max_y, max_z);
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (a[idx] == 0 && b[idx] == 0) continue;
            int jj = static_cast<int>(sy) * j, kk = static_cast<int>(sz) * k;
            r.add_mode(jj, kk, a[idx], b[idx]);
        }
    }
    return r;
}

Fn2 Fn2::linear_substitution(long la, long lb, long lc, long ld) const {
    // f(a y + b z, c y + d z): mode (j,k) -> (j a + k c, j b + k d).
    long homy = 0, homz = 0;
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (a[idx] == 0 && b[idx] == 0) continue;
            homy = std::max(homy, std::abs(j * la + k * lc));
            homz = std::max(homz, std::abs(j * lb + k * ld));
        }
    }
    Fn2 r(static_cast<int>(homy), static_cast<int>(homz));
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (a[idx] == 0 && b[idx] == 0) continue;
            r.add_mode(static_cast<int>(j * la + k * lc), static_cast<int>(j * lb + k * ld),
                       a[idx], b[idx]);
        }
    }
    return r;
}

double Fn2::max_abs_coeff() const {
    double r = 0;
    for (double v : a) r = std::max(r, std::abs(v));
    for (double v : b) r = std::max(r, std::abs(v));
    return r;
}

double Fn2::sup_norm_estimate() const {
    double r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) r += std::hypot(a[i], b[i]);
    return r;
}

Fn2 Fn2::trimmed(double tol) const {
    int my = 0, mz = 0;
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::size_t idx = index(j, k);
            if (std::abs(a[idx]) > tol || std::abs(b[idx]) > tol) {
                my = std::max(my, j);
                mz = std::max(mz, std::abs(k));
            }
        }
    }
    Fn2 r(my, mz);
    for (int j = 0; j <= my; ++j) {
        int kmin = (j == 0 ? 0 : -mz);
        for (int k = kmin; k <= mz; ++k) {
            r.a[r.index(j, k)] = coeff_a(j, k);
            r.b[r.index(j, k)] = coeff_b(j, k);
        }
    }
    r.b[0] = 0.0;
    return r;
}

Fn2 project2(const std::function<double(double, double)>& f, int max_y, int max_z,
             int oversample) {
    int Py = std::max(64, oversample * 2 * (max_y + 1));
    int Pz = std::max(64, oversample * 2 * (max_z + 1));
    // Stage 1: y-transform per z sample.
    std::vector<std::complex<double>> G(static_cast<std::size_t>(max_y + 1) * Pz);
    std::vector<double> row(Py);
    for (int n = 0; n < Pz; ++n) {
        double z = static_cast<double>(n) / Pz;
        for (int m = 0; m < Py; ++m) row[m] = f(static_cast<double>(m) / Py, z);
        for (int j = 0; j <= max_y; ++j) {
            std::complex<double> acc = 0;
            for (int m = 0; m < Py; ++m) {
                double t = std::fmod(static_cast<double>(j) * m / Py, 1.0);
                acc += row[m] * std::complex<double>(std::cos(TWO_PI * t), -std::sin(TWO_PI * t));
            }
            G[static_cast<std::size_t>(j) * Pz + n] = acc / static_cast<double>(Py);
        }
    }
    // Stage 2: z-transform of each row; assemble real coefficients.
    Fn2 r(max_y, max_z);
    for (int j = 0; j <= max_y; ++j) {
        int kmin = (j == 0 ? 0 : -max_z);
        for (int k = kmin; k <= max_z; ++k) {
            std::complex<double> acc = 0;
            for (int n = 0; n < Pz; ++n) {
                double t = std::fmod(static_cast<double>(k) * n / Pz, 1.0);
                acc += G[static_cast<std::size_t>(j) * Pz + n] *
                       std::complex<double>(std::cos(TWO_PI * t), -std::sin(TWO_PI * t));
            }
            acc /= static_cast<double>(Pz);
            // acc is the complex coefficient of e^{2 pi i (j y + k z)};
            // for (j,k) != (0,0): a = 2 Re, b = -2 Im.
            std::size_t idx = r.index(j, k);
            if (j == 0 && k == 0) {
                r.a[idx] = acc.real();
            } else {
                r.a[idx] = 2.0 * acc.real();
                r.b[idx] = -2.0 * acc.imag();
            }
        }
    }
    return r;
}

Fn2 reciprocal(const Fn2& f, int max_y, int max_z, int oversample) {
    return project2([&](double y, double z) { return 1.0 / f(y, z); }, max_y, max_z, oversample)
        .trimmed(1e-14);
}
Fn2 sqrt_fn(const Fn2& f, int max_y, int max_z, int oversample) {
    return project2([&](double y, double z) { return std::sqrt(f(y, z)); }, max_y, max_z,
                    oversample)
        .trimmed(1e-14);
}
Fn2 log_fn(const Fn2& f, int max_y, int max_z, int oversample) {
    return project2([&](double y, double z) { return 0.5 * std::log(f(y, z) * f(y, z)); }, max_y,
                    max_z, oversample)
        .trimmed(1e-14);
}
Fn2 exp_fn(const Fn2& f, int max_y, int max_z, int oversample) {
    return project2([&](double y, double z) { return std::exp(f(y, z)); }, max_y, max_z,
                    oversample)
        .trimmed(1e-14);
}

double mean(const Fn1& f) { return f.a[0]; }
double mean(const Fn2& f) { return f.a[0]; }

Fn1 fiber_mean(const Fn2& f, char axis) {
    if (axis == 'y') {
        // integrate out y: only j = 0 modes survive (orthogonality)
        Fn1 r(f.max_z);
        for (int k = 0; k <= f.max_z; ++k) {
            r.a[k] = f.coeff_a(0, k);
            r.b[k] = f.coeff_b(0, k);
        }
        r.b[0] = 0;
        return r;
    }
    if (axis == 'z') {
        Fn1 r(f.max_y);
        for (int j = 0; j <= f.max_y; ++j) {
            r.a[j] = f.coeff_a(j, 0);
            r.b[j] = f.coeff_b(j, 0);
        }
        r.b[0] = 0;
        return r;
    }
    throw MalformedInput("fiber_mean axis must be 'y' or 'z'");
}

Fn2 compose_y_shift(const Fn2& f, const Fn1& s, int max_z_out, double* tail_estimate) {
    if (s.is_constant(0.0)) {
        if (tail_estimate) *tail_estimate = 0.0;
        return f.shifted(s.a[0], 0.0);
    }
    int probe = max_z_out + 8;
    int Pz = std::max(128, 8 * 2 * (probe + 1));
    // Row data: f(y,z) = sum_j A_j(z) cos(2 pi j y) + B_j(z) sin(2 pi j y).
    // Shifting y by s(z) rotates (A_j, B_j) by angle 2 pi j s(z); the result
    // is exact in y and reprojected in z.
    Fn2 r(f.max_y, max_z_out);
    double tail = 0;
    std::vector<double> Ap(Pz), Bp(Pz);
    for (int j = 0; j <= f.max_y; ++j) {
        for (int n = 0; n < Pz; ++n) {
            double z = static_cast<double>(n) / Pz;
            double A = 0, B = 0;
            int kmin = (j == 0 ? 0 : -f.max_z);
            for (int k = kmin; k <= f.max_z; ++k) {
                double ca = f.coeff_a(j, k), cb = f.coeff_b(j, k);
                if (ca == 0 && cb == 0) continue;
                double sn, cs;
                sincos2pi(std::fmod(static_cast<double>(k) * z, 1.0), sn, cs);
                A += ca * cs + cb * sn;
                B += -ca * sn + cb * cs;
            }
            double rot_s, rot_c;
            sincos2pi(std::fmod(static_cast<double>(j) * s(z), 1.0), rot_s, rot_c);
            Ap[n] = A * rot_c + B * rot_s;
            Bp[n] = -A * rot_s + B * rot_c;
        }
        // project the rotated rows on z modes up to `probe`
        for (int k = 0; k <= probe; ++k) {
            double aA = 0, bA = 0, aB = 0, bB = 0;
            for (int n = 0; n < Pz; ++n) {
                double sn, cs;
                sincos2pi(std::fmod(static_cast<double>(k) * n / Pz, 1.0), sn, cs);
                aA += Ap[n] * cs;
                bA += Ap[n] * sn;
                aB += Bp[n] * cs;
                bB += Bp[n] * sn;
            }
            double norm = (k == 0 ? 1.0 : 2.0) / Pz;
            aA *= norm;
            bA *= norm;
            aB *= norm;
            bB *= norm;
            if (k > max_z_out) {
                tail = std::max({tail, std::abs(aA), std::abs(bA), std::abs(aB), std::abs(bB)});
                continue;
            }
            // Reassemble modes: cos(2pi j y)[aA cos + bA sin](2pi k z)
            //                 + sin(2pi j y)[aB cos + bB sin](2pi k z).
            if (j == 0) {
                r.add_mode(0, k, aA, k == 0 ? 0.0 : bA);
            } else if (k == 0) {
                r.add_mode(j, 0, aA, aB);
            } else {
                r.add_mode(j, k, 0.5 * aA, 0.5 * bA);
                r.add_mode(j, -k, 0.5 * aA, -0.5 * bA);
                r.add_mode(j, k, -0.5 * bB, 0.5 * aB);
                r.add_mode(j, -k, 0.5 * bB, 0.5 * aB);
            }
        }
    }
    if (tail_estimate) *tail_estimate = tail;
    return r;
}

// ------------------------------ Theta --------------------------------------

Theta Theta::rational(std::int64_t p, std::int64_t q) {
    Theta t;
    t.kind = Kind::rational;
    t.rat = Rational(p, q);
    return t;
}

Theta Theta::quadratic(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    if (c == 0) throw MalformedInput("quadratic slope with zero denominator");
    if (d <= 0) throw MalformedInput("quadratic slope needs d > 0");
    if (b == 0) throw MalformedInput("quadratic slope with b = 0 is rational");
    // d must not be a perfect square (else the slope is rational in disguise)
    std::int64_t rd = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(d))));
    for (std::int64_t r = std::max<std::int64_t>(0, rd - 1); r <= rd + 1; ++r)
        if (r * r == d) throw MalformedInput("quadratic slope with square d is rational");
    Theta t;
    t.kind = Kind::quadratic;
    t.qa = a;
    t.qb = b;
    t.qc = c;
    t.qd = d;
    return t;
}

Theta Theta::declared(double value, bool diophantine, double eps_div) {
    Theta t;
    t.kind = Kind::declared;
    t.declared_value = value;
    t.declared_diophantine = diophantine;
    t.eps_div = eps_div;
    return t;
}

Theta Theta::golden() { return quadratic(-1, 1, 2, 5); }

double Theta::value() const {
    switch (kind) {
        case Kind::rational:
            return rat.value();
        case Kind::quadratic:
            return (static_cast<double>(qa) +
                    static_cast<double>(qb) * std::sqrt(static_cast<double>(qd))) /
                   static_cast<double>(qc);
        case Kind::declared:
            return declared_value;
    }
    return 0;
}

bool Theta::is_diophantine_certified() const {
    if (kind == Kind::quadratic) return true; // badly approximable, always
    if (kind == Kind::declared) return declared_diophantine;
    return false;
}

Theta Theta::moebius(long a, long b, long c, long d) const {
    switch (kind) {
        case Kind::rational: {
            std::int64_t num = c * rat.q + d * rat.p;
            std::int64_t den = a * rat.q + b * rat.p;
            if (den == 0) throw MalformedInput("moebius: denominator vanished");
            return Theta::rational(num, den);
        }
        case Kind::quadratic: {
            // (c + d theta)/(a + b theta) with theta = (qa + qb sqrt(qd))/qc,
            // rationalized back into the same field.
            std::int64_t A = c * qc + d * qa, B = d * qb;
            std::int64_t C = a * qc + b * qa, E = b * qb;
            std::int64_t num_r = A * C - B * E * qd;
            std::int64_t num_s = B * C - A * E;
            std::int64_t den = C * C - E * E * qd;
            if (den == 0) throw MalformedInput("moebius: denominator vanished");
            std::int64_t g = std::gcd(std::gcd(std::abs(num_r), std::abs(num_s)), std::abs(den));
            if (g > 1) {
                num_r /= g;
                num_s /= g;
                den /= g;
            }
            if (num_s == 0) return Theta::rational(num_r, den);
            return Theta::quadratic(num_r, num_s, den, qd);
        }
        case Kind::declared: {
            double th = declared_value;
            double v = (c + d * th) / (a + b * th);
            return Theta::declared(v, declared_diophantine, eps_div);
        }
    }
    throw Error("unreachable");
}

Theta Theta::negated() const { return moebius(1, 0, 0, -1); }

std::complex<double> rotation_divisor(const Theta& theta, int j) {
    double t = frac_mult(theta, j);
    return std::complex<double>(std::cos(TWO_PI * t) - 1.0, std::sin(TWO_PI * t));
}

bool rotation_resonant(const Theta& theta, int j) {
    if (j == 0) return true;
    switch (theta.kind) {
        case Theta::Kind::rational:
            return (static_cast<long long>(j) * theta.rat.p) % theta.rat.q == 0;
        case Theta::Kind::quadratic:
            return false;
        case Theta::Kind::declared:
            return std::abs(rotation_divisor(theta, j)) < theta.eps_div;
    }
    return false;
}

double directional_divisor(const Theta& theta, int j, int k) {
    return static_cast<double>(j) + theta.value() * static_cast<double>(k);
}

bool directional_resonant(const Theta& theta, int j, int k) {
    if (j == 0 && k == 0) return true;
    switch (theta.kind) {
        case Theta::Kind::rational:
            return static_cast<long long>(j) * theta.rat.q +
                       static_cast<long long>(k) * theta.rat.p ==
                   0;
        case Theta::Kind::quadratic:
            return k == 0 ? j == 0 : false;
        case Theta::Kind::declared:
            return std::abs(directional_divisor(theta, j, k)) < theta.eps_div;
    }
    return false;
}

// ------------------------------ solvers ------------------------------------

namespace {

void require_solvable(const Theta& theta, bool has_active_modes) {
    if (!has_active_modes) return;
    if (theta.kind == Theta::Kind::declared && !theta.declared_diophantine)
        throw NonDiophantineSlope("slope declared without a Diophantine certificate");
}

} // namespace

Fn1 solve_cohomological(const Fn1& h, const Theta& theta) {
    bool active = false;
    for (int j = 1; j <= h.max_freq; ++j)
        if (h.a[j] != 0 || h.b[j] != 0) active = true;
    require_solvable(theta, active);

    Fn1 psi(h.max_freq);
    for (int j = 1; j <= h.max_freq; ++j) {
        if (h.a[j] == 0 && h.b[j] == 0) continue;
        if (rotation_resonant(theta, j)) {
            if (theta.kind == Theta::Kind::rational)
                throw ResonantFrequency("resonant frequency j=" + std::to_string(j) +
                                        " for rational slope");
            throw NonDiophantineSlope("divisor below eps_div at frequency j=" +
                                      std::to_string(j));
        }
        std::complex<double> div = rotation_divisor(theta, j);
        if (std::abs(div) < 1e-15)
            throw NonDiophantineSlope("vanishing divisor at frequency j=" + std::to_string(j));
        std::complex<double> hc(0.5 * h.a[j], -0.5 * h.b[j]);
        std::complex<double> pc = hc / div;
        psi.a[j] = 2.0 * pc.real();
        psi.b[j] = -2.0 * pc.imag();
    }
    return psi;
}

std::pair<Fn2, double> solve_directional(const Fn2& nu, const Theta& theta) {
    bool active = false;
    for (std::size_t i = 1; i < nu.a.size(); ++i)
        if (nu.a[i] != 0 || nu.b[i] != 0) active = true;
    require_solvable(theta, active);

    Fn2 N(nu.max_y, nu.max_z);
    for (int j = 0; j <= nu.max_y; ++j) {
        int kmin = (j == 0 ? 0 : -nu.max_z);
        for (int k = kmin; k <= nu.max_z; ++k) {
            if (j == 0 && k == 0) continue;
            std::size_t idx = nu.index(j, k);
            if (nu.a[idx] == 0 && nu.b[idx] == 0) continue;
            if (directional_resonant(theta, j, k)) {
                if (theta.kind == Theta::Kind::rational)
                    throw ResonantFrequency("resonant mode (" + std::to_string(j) + "," +
                                            std::to_string(k) + ") for rational slope");
                throw NonDiophantineSlope("directional divisor below eps_div at mode (" +
                                          std::to_string(j) + "," + std::to_string(k) + ")");
            }
            double s = directional_divisor(theta, j, k);
            if (std::abs(s) < 1e-15)
                throw NonDiophantineSlope("vanishing directional divisor");
            std::complex<double> nc(0.5 * nu.a[idx], -0.5 * nu.b[idx]);
            std::complex<double> Nc = nc / std::complex<double>(0.0, TWO_PI * s);
            N.a[idx] = 2.0 * Nc.real();
            N.b[idx] = -2.0 * Nc.imag();
        }
    }
    return {N, -mean(nu)};
}

std::pair<Fn2, Fn2> solve_exterior(const Fn2& kappa) {
    if (std::abs(mean(kappa)) > 1e-12)
        throw NonzeroMean("solve_exterior requires a mean-zero density");
    Fn2 nu(kappa.max_y, kappa.max_z), mu(kappa.max_y, kappa.max_z);
    for (int j = 0; j <= kappa.max_y; ++j) {
        int kmin = (j == 0 ? 0 : -kappa.max_z);
        for (int k = kmin; k <= kappa.max_z; ++k) {
            if (j == 0 && k == 0) continue;
            std::size_t idx = kappa.index(j, k);
            if (kappa.a[idx] == 0 && kappa.b[idx] == 0) continue;
            std::complex<double> kc(0.5 * kappa.a[idx], -0.5 * kappa.b[idx]);
            if (k != 0) {
                // d_w nu channel: nu_hat = kappa_hat / (2 pi i k)
                std::complex<double> nc = kc / std::complex<double>(0.0, TWO_PI * k);
                nu.a[idx] = 2.0 * nc.real();
                nu.b[idx] = -2.0 * nc.imag();
            } else {
                // -1/2 d_v mu channel: mu_hat = -kappa_hat / (pi i j)
                std::complex<double> mc = kc * -1.0 / std::complex<double>(0.0, M_PI * j);
                mu.a[idx] = 2.0 * mc.real();
                mu.b[idx] = -2.0 * mc.imag();
            }
        }
    }
    return {nu, mu};
}

// ------------------------------ ZPoly --------------------------------------

namespace {
// monomial exponents in storage order: 1, y, z, y^2, yz, z^2
constexpr int MON_AY[ZPoly::NMON] = {0, 1, 0, 2, 1, 0};
constexpr int MON_AZ[ZPoly::NMON] = {0, 0, 1, 0, 1, 2};

int mon_index(int ay, int az) {
    for (int i = 0; i < ZPoly::NMON; ++i)
        if (MON_AY[i] == ay && MON_AZ[i] == az) return i;
    return -1;
}
} // namespace

ZPoly ZPoly::monomial(const Fn2& f, int ay, int az) {
    int idx = mon_index(ay, az);
    if (idx < 0) throw DegreeOverflow("ZPoly monomial beyond total degree 2");
    ZPoly p;
    p.c[idx] = f;
    return p;
}

double ZPoly::operator()(double y, double z) const {
    double r = 0;
    for (int i = 0; i < NMON; ++i) {
        double m = 1;
        for (int t = 0; t < MON_AY[i]; ++t) m *= y;
        for (int t = 0; t < MON_AZ[i]; ++t) m *= z;
        r += m * c[i](y, z);
    }
    return r;
}

ZPoly ZPoly::d_dy() const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) {
        // product rule on y^ay z^az * f(y,z)
        r.c[i] = r.c[i] + c[i].d_dy();
        if (MON_AY[i] > 0) {
            int lower = mon_index(MON_AY[i] - 1, MON_AZ[i]);
            r.c[lower] = r.c[lower] + c[i] * static_cast<double>(MON_AY[i]);
        }
    }
    return r;
}

ZPoly ZPoly::d_dz() const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) {
        r.c[i] = r.c[i] + c[i].d_dz();
        if (MON_AZ[i] > 0) {
            int lower = mon_index(MON_AY[i], MON_AZ[i] - 1);
            r.c[lower] = r.c[lower] + c[i] * static_cast<double>(MON_AZ[i]);
        }
    }
    return r;
}

ZPoly ZPoly::operator+(const ZPoly& o) const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) r.c[i] = c[i] + o.c[i];
    return r;
}

ZPoly ZPoly::operator-(const ZPoly& o) const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) r.c[i] = c[i] - o.c[i];
    return r;
}

ZPoly ZPoly::operator*(double s) const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) r.c[i] = c[i] * s;
    return r;
}

ZPoly ZPoly::operator*(const ZPoly& o) const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) {
        if (c[i].max_abs_coeff() == 0.0) continue;
        for (int j = 0; j < NMON; ++j) {
            if (o.c[j].max_abs_coeff() == 0.0) continue;
            int ay = MON_AY[i] + MON_AY[j], az = MON_AZ[i] + MON_AZ[j];
            int idx = mon_index(ay, az);
            if (idx < 0)
                throw DegreeOverflow("ZPoly product exceeds total degree 2");
            r.c[idx] = r.c[idx] + c[i] * o.c[j];
        }
    }
    return r;
}

ZPoly ZPoly::operator*(const Fn2& f) const {
    ZPoly r;
    for (int i = 0; i < NMON; ++i) r.c[i] = c[i] * f;
    return r;
}

bool ZPoly::is_periodic_part_only(double tol) const {
    for (int i = 1; i < NMON; ++i)
        if (c[i].max_abs_coeff() > tol) return false;
    return true;
}

double ZPoly::max_abs_coeff() const {
    double r = 0;
    for (int i = 0; i < NMON; ++i) r = std::max(r, c[i].max_abs_coeff());
    return r;
}

} // namespace lolight
