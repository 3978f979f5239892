#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dsel {

using Id = std::uint64_t;
using Vec = std::vector<double>;

// Error taxonomy. The CLI maps config_error to exit code 2 and everything
// else to exit code 3.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), final_residual(residual) {}
    double final_residual;
};

// FNV-1a, used for event-log digests and artifact manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(s.data(), s.size());
}

inline std::uint64_t fnv1a64(std::span<const Id> ids) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Id id : ids) {
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((id >> (8 * b)) & 0xff);
        h = fnv1a64(bytes, 8, h);
    }
    return h;
}

std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form; used everywhere a double lands in a
// CSV or log so reruns diff clean.
std::string fmt_double(double v);

// Compensated accumulator for long reward sums.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

}  // namespace dsel
