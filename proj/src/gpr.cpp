#include "kremu/gpr.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace kremu {

namespace {

DenseVector centered(const DenseVector& y, double offset) {
    DenseVector out = y;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= offset;
    return out;
}

GprModel fit_from_gram(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel,
                       const DenseMatrix& gram, double noise_variance, const GprOptions& options) {
    GprModel m;
    m.x_train = x;
    m.kernel = kernel;
    m.noise_variance = noise_variance;
    m.y_mean = options.center_targets ? mean(y.span()) : 0.0;
    m.factor = cholesky(add_diagonal(gram, noise_variance), options.jitter);
    m.alpha = solve_cholesky(m.factor, centered(y, m.y_mean));
    return m;
}

void check_training_set(const DenseMatrix& x, const DenseVector& y, double noise_variance) {
    if (x.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "GPR needs at least one training row");
    if (x.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(x.rows()) + " training rows but " + std::to_string(y.size()) + " targets");
    }
    if (!(noise_variance >= 0.0)) throw Error(ErrorCode::InvalidHyperparameter, "noise variance must be >= 0");
}

}  // namespace

GprModel gpr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double noise_variance,
                 const GprOptions& options) {
    check_training_set(x, y, noise_variance);
    return fit_from_gram(x, y, kernel, kernel_matrix(kernel, x).m, noise_variance, options);
}

DenseVector gpr_predict_mean(const GprModel& m, const DenseMatrix& xq) {
    if (xq.cols() != m.x_train.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(xq.cols()) +
                                                      " columns, model expects " + std::to_string(m.x_train.cols()));
    }
    DenseVector mean(xq.rows());
    for (std::size_t q = 0; q < xq.rows(); ++q) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.x_train.rows(); ++i) s += m.kernel(m.x_train.row(i), xq.row(q)) * m.alpha[i];
        mean[q] = m.y_mean + s;
    }
    return mean;
}

Posterior gpr_predict(const GprModel& m, const DenseMatrix& xq) {
    Posterior p{gpr_predict_mean(m, xq), DenseVector(xq.rows())};
    const std::size_t n = m.x_train.rows();
    DenseVector k_star(n);
    for (std::size_t q = 0; q < xq.rows(); ++q) {
        for (std::size_t i = 0; i < n; ++i) k_star[i] = m.kernel(m.x_train.row(i), xq.row(q));
        const DenseVector v = solve_lower(m.factor.l, k_star);
        const double var = m.kernel(xq.row(q), xq.row(q)) - dot(v.span(), v.span());
        p.variance[q] = var > 0.0 ? var : 0.0;
    }
    return p;
}

double gpr_log_marginal_likelihood(const GprModel& m, const DenseVector& y) {
    if (y.size() != m.alpha.size()) {
        throw Error(ErrorCode::DimensionMismatch, "LML targets of length " + std::to_string(y.size()) +
                                                      " for a model with " + std::to_string(m.alpha.size()) + " rows");
    }
    const DenseVector yc = centered(y, m.y_mean);
    const double n = static_cast<double>(y.size());
    return -0.5 * dot(yc.span(), m.alpha.span()) - m.factor.half_log_det() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

ConfidenceBand confidence_interval(const Posterior& p, double z) {
    ConfidenceBand band{DenseVector(p.mean.size()), DenseVector(p.mean.size())};
    for (std::size_t i = 0; i < p.mean.size(); ++i) {
        const double half = z * std::sqrt(p.variance[i]);
        band.lower[i] = p.mean[i] - half;
        band.upper[i] = p.mean[i] + half;
    }
    return band;
}

GprSelection gpr_grid_select(const DenseMatrix& x, const DenseVector& y, const KernelExpr& family,
                             const GprGrid& grid, const GprOptions& options) {
    if (grid.lengthscales.empty() || grid.variances.empty() || grid.noise_variances.empty()) {
        throw Error(ErrorCode::EmptyGrid, "GPR grid needs at least one lengthscale, variance and noise value");
    }
    for (double noise : grid.noise_variances) check_training_set(x, y, noise);

    std::optional<GprSelection> best;
    for (double ls : grid.lengthscales) {
        for (double var : grid.variances) {
            const KernelExpr kernel = family.with_hyperparameters(ls, var);
            const DenseMatrix gram = kernel_matrix(kernel, x).m;
            for (double noise : grid.noise_variances) {
                GprModel m;
                try {
                    m = fit_from_gram(x, y, kernel, gram, noise, options);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::NotPositiveDefinite) continue;
                    throw;
                }
                const double lml = gpr_log_marginal_likelihood(m, y);
                if (!best || lml > best->log_marginal_likelihood) {
                    best = GprSelection{std::move(m), lml, ls, var};
                }
            }
        }
    }
    if (!best) throw Error(ErrorCode::NotPositiveDefinite, "no GPR grid point could be factorized");
    return std::move(*best);
}

}  // namespace kremu
