#include "dsel/linalg.hpp"

#include <cmath>
#include <sstream>

namespace dsel {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scal(double a, std::span<double> x) {
    for (auto& v : x) v *= a;
}

CgSolution cg_solve(const LinOp& apply, std::span<const double> b, double tol, int max_iters) {
    const std::size_t n = b.size();
    CgSolution sol;
    sol.x.assign(n, 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) return sol;  // exact solution of A x = 0

    Vec r(b.begin(), b.end());
    Vec p = r;
    Vec q(n, 0.0);
    double rs = dot(r, r);

    for (int it = 1; it <= max_iters; ++it) {
        apply(p, q);
        const double pq = dot(p, q);
        if (pq <= 0.0) {
            throw solver_error(
                "cg_solve: operator is not positive definite (p'Ap <= 0); "
                "increase damping",
                std::sqrt(rs) / bnorm);
        }
        const double alpha = rs / pq;
        axpy(alpha, p, sol.x);
        axpy(-alpha, q, r);
        const double rs_next = dot(r, r);
        sol.iterations = it;
        sol.relative_residual = std::sqrt(rs_next) / bnorm;
        if (sol.relative_residual <= tol) return sol;
        const double beta = rs_next / rs;
        rs = rs_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    std::ostringstream msg;
    msg << "cg_solve: no convergence in " << max_iters
        << " iterations, relative residual " << sol.relative_residual;
    throw solver_error(msg.str(), sol.relative_residual);
}

Vec cholesky_solve(Vec a, std::size_t n, Vec b) {
    if (a.size() != n * n || b.size() != n)
        throw data_error("cholesky_solve: dimension mismatch");
    // Factor A = L L^T in place (lower triangle).
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) throw solver_error("cholesky_solve: matrix is not positive definite");
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return b;
}

}  // namespace dsel
