#include "kremu/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kremu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Directional derivatives of the dual objective. Raising beta_i changes it at rate up(i);
// lowering beta_i changes it at rate -down(i). A pair (i, j) can improve when up(i) > down(j).
struct Slopes {
    const std::vector<double>& beta;
    const std::vector<double>& grad;  // y_c - K beta
    double epsilon;
    double c;

    [[nodiscard]] double up(std::size_t i) const {
        if (beta[i] >= c) return -kInf;
        return beta[i] >= 0.0 ? grad[i] - epsilon : grad[i] + epsilon;
    }
    [[nodiscard]] double down(std::size_t i) const {
        if (beta[i] <= -c) return kInf;
        return beta[i] > 0.0 ? grad[i] - epsilon : grad[i] + epsilon;
    }
};

// Exact maximizer of the piecewise-quadratic objective along beta_i += t, beta_j -= t.
double line_search(double slope0, double curvature, double beta_i, double beta_j, double c, double epsilon) {
    const double t_max = std::min(c - beta_i, c + beta_j);
    double kinks[2] = {beta_i < 0.0 ? -beta_i : kInf, beta_j > 0.0 ? beta_j : kInf};
    std::sort(std::begin(kinks), std::end(kinks));

    double t_start = 0.0;
    double slope = slope0;
    for (double kink : kinks) {
        if (kink >= t_max) break;
        if (curvature > 0.0 && t_start + slope / curvature <= kink) return t_start + slope / curvature;
        // Crossing zero for either coordinate drops the slope by 2*epsilon.
        slope = slope - curvature * (kink - t_start) - 2.0 * epsilon;
        t_start = kink;
        if (slope <= 0.0) return t_start;
    }
    if (curvature > 0.0) return std::min(t_start + slope / curvature, t_max);
    return t_max;
}

double objective_from_gradient(const std::vector<double>& beta, const std::vector<double>& grad,
                               const std::vector<double>& yc, double epsilon) {
    double yb = 0.0, gb = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        yb += yc[i] * beta[i];
        gb += grad[i] * beta[i];
        l1 += std::abs(beta[i]);
    }
    return 0.5 * (yb + gb) - epsilon * l1;
}

}  // namespace

double svr_dual_objective(const DenseMatrix& gram, const DenseVector& y, double epsilon, const DenseVector& beta) {
    const DenseVector kb = matvec(gram, beta);
    double l1 = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) l1 += std::abs(beta[i]);
    return -0.5 * dot(beta.span(), kb.span()) - epsilon * l1 + dot(y.span(), beta.span());
}

SvrFitResult svr_fit(const DenseMatrix& x, const DenseVector& y, const KernelExpr& kernel, double epsilon,
                     double c, const SvrOptions& options) {
    if (x.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "SVR needs at least one training row");
    if (x.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(x.rows()) + " training rows but " + std::to_string(y.size()) + " targets");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorCode::InvalidHyperparameter, "SVR epsilon must be >= 0");
    }
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidHyperparameter, "SVR C must be > 0");
    if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidHyperparameter, "SVR tol must be > 0");

    const std::size_t n = x.rows();
    const DenseMatrix gram = kernel_matrix(kernel, x).m;
    const double y_mean = options.center_targets ? mean(y.span()) : 0.0;

    std::vector<double> yc(n), beta(n, 0.0), grad(n);
    for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - y_mean;
    grad = yc;
    const Slopes slopes{beta, grad, epsilon, c};

    SvrFitResult result;
    for (;;) {
        std::size_t i_up = n, j_down = n;
        double best_up = -kInf, best_down = kInf;
        for (std::size_t k = 0; k < n; ++k) {
            const double u = slopes.up(k);
            if (u > best_up) best_up = u, i_up = k;
            const double d = slopes.down(k);
            if (d < best_down) best_down = d, j_down = k;
        }
        result.max_violation = (i_up == n || j_down == n) ? 0.0 : best_up - best_down;
        if (result.max_violation <= options.tol) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iter) break;

        const std::size_t i = i_up, j = j_down;
        const double curvature = std::max(gram(i, i) + gram(j, j) - 2.0 * gram(i, j), 0.0);
        const double t = line_search(result.max_violation, curvature, beta[i], beta[j], c, epsilon);

        if (t == c - beta[i]) beta[i] = c; else beta[i] += t;
        if (t == c + beta[j]) beta[j] = -c; else beta[j] -= t;
        auto ki = gram.row(i);
        auto kj = gram.row(j);
        for (std::size_t k = 0; k < n; ++k) grad[k] -= t * (ki[k] - kj[k]);
        ++result.iterations;

        if (options.record_trace) {
            double sum = 0.0, excess = 0.0;
            for (double b : beta) {
                sum += b;
                excess = std::max(excess, std::abs(b) - c);
            }
            result.trace.objective.push_back(objective_from_gradient(beta, grad, yc, epsilon));
            result.trace.equality_residual.push_back(std::abs(sum));
            result.trace.box_excess.push_back(excess);
        }
    }

    // Bias from free vectors; otherwise the midpoint of the interval allowed by the KKT conditions.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -kInf, upper = kInf;
    for (std::size_t k = 0; k < n; ++k) {
        if (beta[k] > 0.0 && beta[k] < c) {
            free_sum += grad[k] - epsilon;
            ++free_count;
        } else if (beta[k] < 0.0 && beta[k] > -c) {
            free_sum += grad[k] + epsilon;
            ++free_count;
        }
        lower = std::max(lower, slopes.up(k));
        upper = std::min(upper, slopes.down(k));
    }
    double b = 0.0;
    if (free_count > 0) {
        b = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
        b = 0.5 * (lower + upper);
    } else if (std::isfinite(lower)) {
        b = lower;
    } else if (std::isfinite(upper)) {
        b = upper;
    }

    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < n; ++k)
        if (beta[k] != 0.0) support.push_back(k);
    SvrModel& m = result.model;
    m.x_support = select_rows(x, support);
    std::vector<double> coef;
    coef.reserve(support.size());
    for (std::size_t k : support) coef.push_back(beta[k]);
    m.dual_coef = DenseVector(std::move(coef));
    m.bias = b + y_mean;
    m.kernel = kernel;
    m.epsilon = epsilon;
    m.c = c;
    result.beta = DenseVector(beta);
    result.dual_objective = objective_from_gradient(beta, grad, yc, epsilon);
    return result;
}

DenseVector svr_predict(const SvrModel& m, const DenseMatrix& xq) {
    if (xq.cols() != m.x_support.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(xq.cols()) +
                                                      " columns, model expects " + std::to_string(m.x_support.cols()));
    }
    DenseVector out(xq.rows());
    for (std::size_t q = 0; q < xq.rows(); ++q) {
        double s = m.bias;
        for (std::size_t i = 0; i < m.x_support.rows(); ++i) s += m.dual_coef[i] * m.kernel(m.x_support.row(i), xq.row(q));
        out[q] = s;
    }
    return out;
}

}  // namespace kremu
