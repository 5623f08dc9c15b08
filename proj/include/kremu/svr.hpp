#pragma once

#include <cstddef>
#include <vector>

#include "kremu/kernels.hpp"
#include "kremu/numerics.hpp"

namespace kremu {

struct SvrOptions {
    double tol = 1e-3;              // stop once the maximal KKT violation is at or below this
    std::size_t max_iter = 100000;  // pairwise updates
    bool center_targets = true;
    bool record_trace = false;      // keep per-iteration objective and feasibility diagnostics
};

/// Fitted epsilon-SVR:  f(x) = sum_i dual_coef_i k(x_support_i, x) + bias.
struct SvrModel {
    DenseMatrix x_support;
    DenseVector dual_coef;  // beta_i = alpha_i - alpha_i*, nonzero entries only
    double bias = 0.0;      // includes the target mean removed before solving
    KernelExpr kernel = KernelExpr::matern32();
    double epsilon = 0.0;
    double c = 1.0;
};

struct SvrTrace {
    std::vector<double> objective;          // dual objective after each update
    std::vector<double> equality_residual;  // |sum beta| after each update
    std::vector<double> box_excess;         // max(|beta_i| - C, 0) after each update
};

struct SvrFitResult {
    SvrModel model;
    bool converged = false;
    std::size_t iterations = 0;
    double max_violation = 0.0;
    double dual_objective = 0.0;  // -1/2 b'Kb - eps |b|_1 + y_c' b at the solution
    DenseVector beta;             // full dual vector, one entry per training row
    SvrTrace trace;
};

/// Solves the epsilon-insensitive dual with box constraint C by SMO pair updates.
/// Hitting max_iter is reported through `converged`, not thrown.
SvrFitResult svr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double epsilon,
                     double c, const SvrOptions& options = {});

DenseVector svr_predict(const SvrModel& m, const DenseMatrix& xq);

/// Dual objective for an arbitrary beta on a precomputed Gram matrix; also used by tests.
double svr_dual_objective(const DenseMatrix& gram, const DenseVector& y, double epsilon, const DenseVector& beta);

}  // namespace kremu
