#include "lolight/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lolight {

std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
    // Analytic eigenvalues via the trigonometric method (e.g. Smith 1961).
    double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    if (p1 < 1e-300) {
        std::array<double, 3> ev{a(0, 0), a(1, 1), a(2, 2)};
        std::sort(ev.begin(), ev.end());
        return ev;
    }
    double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    Mat3 b = (a - Mat3::identity() * q) * (1.0 / p);
    double r = b.det() / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e1 = q + 2.0 * p * std::cos(phi);
    double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    double e2 = 3.0 * q - e1 - e3;
    std::array<double, 3> ev{e1, e2, e3};
    std::sort(ev.begin(), ev.end());
    return ev;
}

int max_threads() {
    if (const char* env = std::getenv("LOLIGHT3_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    int threads = max_threads();
    if (threads <= 1 || count < 256) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < count; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace lolight
