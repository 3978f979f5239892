#include <doctest.h>

#include <set>

#include "dsel/linalg.hpp"
#include "dsel/rng.hpp"

using namespace dsel;

TEST_CASE("derived seeds are deterministic and distinct per stream") {
    CHECK(derive_seed(42, "alpha") == derive_seed(42, "alpha"));
    CHECK(derive_seed(42, "alpha") != derive_seed(42, "beta"));
    CHECK(derive_seed(42, "alpha", 1) != derive_seed(42, "alpha", 2));
    CHECK(derive_seed(42, "alpha") != derive_seed(43, "alpha"));
}

TEST_CASE("uniform stays in [0,1) and replays under the same seed") {
    Rng a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(x == b.uniform());
    }
}

TEST_CASE("below is bounded and covers small ranges") {
    Rng rng(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 500; ++i) {
        const auto v = rng.below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("sample_without_replacement returns distinct indices") {
    Rng rng(11);
    auto idx = rng.sample_without_replacement(50, 20);
    CHECK(idx.size() == 20);
    std::set<std::size_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 20);
    for (auto i : idx) CHECK(i < 50);

    // Requesting more than available returns everything.
    auto all = rng.sample_without_replacement(5, 99);
    CHECK(all.size() == 5);
}

TEST_CASE("dirichlet draws live on the simplex") {
    Rng rng(5);
    const Vec alpha = {0.4, 2.0, 5.0, 0.01};
    for (int i = 0; i < 50; ++i) {
        auto d = rng.dirichlet(alpha);
        double sum = 0.0;
        for (double v : d) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gamma moments are roughly right") {
    Rng rng(13);
    const double shape = 3.5;
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += rng.gamma(shape);
    mean /= n;
    CHECK(mean == doctest::Approx(shape).epsilon(0.05));
}

namespace {

LinOp dense_op(const Vec& a, std::size_t n) {
    return [a, n](std::span<const double> v, std::span<double> out) {
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += a[r * n + c] * v[c];
            out[r] = s;
        }
    };
}

}  // namespace

TEST_CASE("cg matches a direct Cholesky solve on an SPD system") {
    Rng rng(21);
    const std::size_t n = 12;
    Vec m(n * n), a(n * n, 0.0);
    for (auto& v : m) v = rng.normal();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += m[k * n + r] * m[k * n + c];
            a[r * n + c] = s + (r == c ? 0.5 : 0.0);
        }
    Vec b(n);
    for (auto& v : b) v = rng.normal();

    const auto sol = cg_solve(dense_op(a, n), b, 1e-12, 200);
    const Vec direct = cholesky_solve(a, n, b);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(sol.x[i] == doctest::Approx(direct[i]).epsilon(1e-9));
}

TEST_CASE("cg on the identity converges in one exact step") {
    Vec eye = {1, 0, 0, 1};
    Vec b = {0.3, -1.7};
    const auto sol = cg_solve(dense_op(eye, 2), b, 1e-10, 10);
    CHECK(sol.iterations == 1);
    CHECK(sol.x[0] == b[0]);
    CHECK(sol.x[1] == b[1]);
}

TEST_CASE("cg reports negative curvature with damping advice") {
    Vec indefinite = {1, 0, 0, -1};
    Vec b = {0.0, 1.0};
    CHECK_THROWS_WITH_AS(cg_solve(dense_op(indefinite, 2), b, 1e-10, 10),
                         doctest::Contains("damping"), solver_error);
}

TEST_CASE("cg carries the final residual when it runs out of iterations") {
    Rng rng(31);
    const std::size_t n = 30;
    Vec a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0 + 1000.0 * rng.uniform();
    Vec b(n);
    for (auto& v : b) v = rng.normal();
    try {
        cg_solve(dense_op(a, n), b, 1e-14, 2);
        FAIL("expected solver_error");
    } catch (const solver_error& e) {
        CHECK(e.final_residual > 0.0);
    }
}

TEST_CASE("cholesky rejects non-positive-definite input") {
    Vec singular = {1, 1, 1, 1};
    CHECK_THROWS_AS(cholesky_solve(singular, 2, Vec{1, 2}), solver_error);
}

TEST_CASE("kahan accumulation survives adversarial ordering") {
    KahanSum s;
    s.add(1e16);
    for (int i = 0; i < 10; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == doctest::Approx(10.0).epsilon(1e-12));
}
