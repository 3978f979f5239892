#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dsel/common.hpp"

namespace dsel {

// Every randomized stage of the pipeline draws from its own derived stream so
// that adding or reordering unrelated stages cannot disturb a seeded run.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index);

// mt19937_64 plus hand-rolled distributions. The standard fully specifies the
// engine but not the library distributions, so the transforms live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    double normal();

    double gamma(double shape);

    Vec dirichlet(std::span<const double> alpha);

    // Partial Fisher-Yates; returns min(m, n) distinct indices in [0, n).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dsel
