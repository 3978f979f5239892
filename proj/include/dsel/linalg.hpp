#pragma once

#include <functional>
#include <span>

#include "dsel/common.hpp"

namespace dsel {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);

// Applies a symmetric positive-definite operator: out = A * in.
using LinOp = std::function<void(std::span<const double>, std::span<double>)>;

struct CgSolution {
    Vec x;
    int iterations = 0;
    double relative_residual = 0.0;
};

// Conjugate gradient for SPD operators. Converges when |r| <= tol * |b|.
// Throws solver_error on negative curvature (operator not positive definite;
// the message advises damping) and on hitting max_iters with the final
// residual attached.
CgSolution cg_solve(const LinOp& apply, std::span<const double> b, double tol, int max_iters);

// In-place Cholesky solve of a small dense SPD system (row-major n x n).
// Throws solver_error when the factorization breaks down.
Vec cholesky_solve(Vec a, std::size_t n, Vec b);

}  // namespace dsel
