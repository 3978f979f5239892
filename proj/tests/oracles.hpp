// Test-only oracles, kept independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <vector>

#include "dsel/common.hpp"
#include "dsel/linalg.hpp"
#include "dsel/reward.hpp"

namespace dsel::testutil {

inline std::filesystem::path fresh_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto p = std::filesystem::temp_directory_path() /
                   ("dsel_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Central finite differences of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, Vec theta,
                       double h = 1e-6) {
    Vec g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double save = theta[i];
        const double step = h * std::max(1.0, std::abs(save));
        theta[i] = save + step;
        const double fp = f(theta);
        theta[i] = save - step;
        const double fm = f(theta);
        theta[i] = save;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

inline Vec average_ranks(const Vec& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vec ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const Vec& a, const Vec& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const Vec& a, const Vec& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

// Full-sort top-k oracle: score descending, id ascending.
inline std::vector<Id> topk_oracle(std::vector<std::pair<Id, double>> scores, std::size_t k) {
    std::sort(scores.begin(), scores.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    std::vector<Id> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(scores[i].first);
    return out;
}

// Newton's method on the regularized objective; the dense Hessian is
// assembled from HVPs against basis vectors.
inline void newton_train(RewardModel& model, std::span<const Example> xs,
                         double grad_tol = 1e-11, int max_iter = 200) {
    const std::size_t p = model.param_count();
    for (int it = 0; it < max_iter; ++it) {
        const Vec g = model.objective_gradient(xs);
        if (norm2(g) < grad_tol) return;
        Vec hessian(p * p, 0.0);
        Vec basis(p, 0.0);
        Vec col(p, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            basis[j] = 1.0;
            model.objective_hessian_vec(xs, basis, col);
            for (std::size_t r = 0; r < p; ++r) hessian[r * p + j] = col[r];
            basis[j] = 0.0;
        }
        const Vec step = cholesky_solve(std::move(hessian), p, g);
        axpy(-1.0, step, model.params());
    }
    throw solver_error("newton_train: no convergence");
}

}  // namespace dsel::testutil
