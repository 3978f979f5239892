#include "dsel/rng.hpp"

#include <cmath>

namespace dsel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    return splitmix64(splitmix64(base) ^ fnv1a64(tag));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
    return splitmix64(derive_seed(base, tag) ^ splitmix64(index));
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw data_error("Rng::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t r = eng_();
        if (r >= threshold) return r % n;
    }
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 == 0.0);
    double u2 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double two_pi_u2 = 2.0 * 3.14159265358979323846 * u2;
    spare_ = mag * std::sin(two_pi_u2);
    has_spare_ = true;
    return mag * std::cos(two_pi_u2);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw data_error("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1, then scale back.
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

Vec Rng::dirichlet(std::span<const double> alpha) {
    Vec g(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        g[i] = gamma(alpha[i]);
        total += g[i];
    }
    if (total <= 0.0) {
        // All gammas underflowed; fall back to the flat point.
        for (auto& v : g) v = 1.0 / static_cast<double>(g.size());
        return g;
    }
    for (auto& v : g) v /= total;
    return g;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t m) {
    if (m > n) m = n;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

}  // namespace dsel
