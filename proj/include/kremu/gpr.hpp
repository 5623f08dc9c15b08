#pragma once

#include <vector>

#include "kremu/kernels.hpp"
#include "kremu/numerics.hpp"

namespace kremu {

struct GprOptions {
    bool center_targets = true;  // subtract mean(y) before fitting; disabled only for oracle checks
    JitterPolicy jitter{};
};

/// Exact GP regressor with zero-mean prior on the centered targets.
struct GprModel {
    DenseMatrix x_train;
    DenseVector alpha;  // (K + noise I)^-1 (y - y_mean)
    CholeskyFactor factor;
    KernelExpr kernel = KernelExpr::matern32();
    double noise_variance = 0.0;
    double y_mean = 0.0;
};

struct Posterior {
    DenseVector mean;
    DenseVector variance;  // per point, clamped at 0
};

struct ConfidenceBand {
    DenseVector lower;
    DenseVector upper;
};

GprModel gpr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double noise_variance,
                 const GprOptions& options = {});

Posterior gpr_predict(const GprModel& m, const DenseMatrix& xq);

/// Posterior mean only; skips the triangular solves needed for the variance.
DenseVector gpr_predict_mean(const GprModel& m, const DenseMatrix& xq);

double gpr_log_marginal_likelihood(const GprModel& m, const DenseVector& y);

/// mean +- z * sqrt(variance)
ConfidenceBand confidence_interval(const Posterior& p, double z = 1.96);

struct GprGrid {
    std::vector<double> lengthscales;
    std::vector<double> variances;
    std::vector<double> noise_variances;
};

struct GprSelection {
    GprModel model;
    double log_marginal_likelihood = 0.0;
    double lengthscale = 0.0;
    double variance = 0.0;
};

/// Exhaustive LML maximization over the grid, iterated ls (outer), variance, noise (inner).
/// The first grid point reaching the maximum wins. Grid points whose factorization fails are skipped.
GprSelection gpr_grid_select(const DenseMatrix& x, const DenseVector& y, const KernelExpr& family,
                             const GprGrid& grid, const GprOptions& options = {});

}  // namespace kremu
