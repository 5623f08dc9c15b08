#include "kremu/krr.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace kremu {

namespace {

DenseVector solve_regularized(const DenseMatrix& gram, double lambda, const DenseVector& targets,
                              const JitterPolicy& jitter) {
    return solve_cholesky(cholesky(add_diagonal(gram, lambda), jitter), targets);
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::InvalidHyperparameter, "KRR lambda must be > 0, got " + format_double(lambda));
    }
}

}  // namespace

KrrModel krr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double lambda,
                 const KrrOptions& options) {
    if (x.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "KRR needs at least one training row");
    if (x.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(x.rows()) + " training rows but " + std::to_string(y.size()) + " targets");
    }
    check_lambda(lambda);

    KrrModel m;
    m.x_train = x;
    m.kernel = kernel;
    m.lambda = lambda;
    m.bias = options.center_targets ? mean(y.span()) : 0.0;
    DenseVector yc = y;
    for (std::size_t i = 0; i < yc.size(); ++i) yc[i] -= m.bias;
    m.alpha = solve_regularized(kernel_matrix(kernel, x).m, lambda, yc, options.jitter);
    return m;
}

DenseVector krr_predict(const KrrModel& m, const DenseMatrix& xq) {
    if (xq.cols() != m.x_train.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(xq.cols()) +
                                                      " columns, model expects " + std::to_string(m.x_train.cols()));
    }
    DenseVector out(xq.rows());
    for (std::size_t q = 0; q < xq.rows(); ++q) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.x_train.rows(); ++i) s += m.alpha[i] * m.kernel(m.x_train.row(i), xq.row(q));
        out[q] = s + m.bias;
    }
    return out;
}

CvGrid CvGrid::defaults() {
    CvGrid g;
    g.lambdas = {1e-6, 1e-4, 1e-2, 1.0, 1e2};
    for (double ls : {0.5, 1.0, 2.0, 5.0}) g.kernel_candidates.push_back(KernelExpr::matern32(ls, 1.0));
    for (double ls : {0.5, 1.0, 2.0, 5.0}) g.kernel_candidates.push_back(KernelExpr::rbf(ls, 1.0));
    g.folds = 5;
    return g;
}

std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorCode::TooFewSamples, "cross-validation needs at least 2 folds");
    if (folds > n) {
        throw Error(ErrorCode::TooFewSamples,
                    std::to_string(folds) + " folds requested for " + std::to_string(n) + " samples");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates on mt19937_64 output directly; std::shuffle is not specified bit-for-bit.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::vector<std::size_t>> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t begin = f * n / folds;
        const std::size_t end = (f + 1) * n / folds;
        out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

CvResult krr_cv_select(const DenseMatrix& x, const DenseVector& y, const CvGrid& grid, std::uint64_t seed,
                       const KrrOptions& options) {
    if (grid.lambdas.empty() || grid.kernel_candidates.empty()) {
        throw Error(ErrorCode::EmptyGrid, "KRR grid needs at least one lambda and one kernel");
    }
    if (x.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(x.rows()) + " training rows but " + std::to_string(y.size()) + " targets");
    }
    for (double lambda : grid.lambdas) check_lambda(lambda);
    const auto folds = cv_folds(x.rows(), grid.folds, seed);

    // Training side of each fold, as index lists.
    std::vector<std::vector<std::size_t>> train_idx(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<bool> held(x.rows(), false);
        for (std::size_t i : folds[f]) held[i] = true;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (!held[i]) train_idx[f].push_back(i);
    }

    CvResult result;
    double best = std::numeric_limits<double>::infinity();
    for (const KernelExpr& kernel : grid.kernel_candidates) {
        const DenseMatrix full = kernel_matrix(kernel, x).m;
        for (double lambda : grid.lambdas) {
            double total = 0.0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const auto& tr = train_idx[f];
                const auto& va = folds[f];
                DenseMatrix gram(tr.size(), tr.size());
                DenseVector targets(tr.size());
                double offset = 0.0;
                if (options.center_targets) {
                    for (std::size_t i : tr) offset += y[i];
                    offset /= static_cast<double>(tr.size());
                }
                for (std::size_t a = 0; a < tr.size(); ++a) {
                    targets[a] = y[tr[a]] - offset;
                    for (std::size_t b = 0; b < tr.size(); ++b) gram(a, b) = full(tr[a], tr[b]);
                }
                const DenseVector alpha = solve_regularized(gram, lambda, targets, options.jitter);
                double sse = 0.0;
                for (std::size_t v : va) {
                    double pred = offset;
                    for (std::size_t a = 0; a < tr.size(); ++a) pred += alpha[a] * full(v, tr[a]);
                    sse += (pred - y[v]) * (pred - y[v]);
                }
                total += std::sqrt(sse / static_cast<double>(va.size()));
            }
            const double score = total / static_cast<double>(folds.size());
            result.cv_table.push_back(CvEntry{kernel, lambda, score});
            if (score < best) {
                best = score;
                result.best_index = result.cv_table.size() - 1;
            }
        }
    }
    const CvEntry& winner = result.cv_table[result.best_index];
    result.model = krr_fit(x, y, winner.kernel, winner.lambda, options);
    return result;
}

}  // namespace kremu
