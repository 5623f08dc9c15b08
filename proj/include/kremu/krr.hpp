#pragma once

#include <cstdint>
#include <vector>

#include "kremu/kernels.hpp"
#include "kremu/numerics.hpp"

namespace kremu {

struct KrrOptions {
    bool center_targets = true;
    JitterPolicy jitter{};
};

/// f(x) = sum_i alpha_i k(x_i, x) + bias, with bias the training-target mean.
struct KrrModel {
    DenseMatrix x_train;
    DenseVector alpha;
    double bias = 0.0;
    KernelExpr kernel = KernelExpr::matern32();
    double lambda = 1.0;
};

KrrModel krr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double lambda,
                 const KrrOptions& options = {});

DenseVector krr_predict(const KrrModel& m, const DenseMatrix& xq);

struct CvGrid {
    std::vector<double> lambdas;
    std::vector<KernelExpr> kernel_candidates;
    std::size_t folds = 5;

    /// lambda in {1e-6, 1e-4, 1e-2, 1, 1e2}; matern32 and rbf with ls in {0.5, 1, 2, 5}.
    static CvGrid defaults();
};

struct CvEntry {
    KernelExpr kernel;
    double lambda = 0.0;
    double mean_rmse = 0.0;  // mean validation RMSE over folds
};

struct CvResult {
    KrrModel model;
    std::vector<CvEntry> cv_table;  // (kernel outer, lambda inner) order
    std::size_t best_index = 0;
};

/// Fold assignment used by krr_cv_select: seeded shuffle, then contiguous split into `folds` parts.
std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

CvResult krr_cv_select(const DenseMatrix& x, const DenseVector& y, const CvGrid& grid, std::uint64_t seed,
                       const KrrOptions& options = {});

}  // namespace kremu
