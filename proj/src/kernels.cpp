#include "kremu/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace kremu {

namespace {

void validate_leaf(KernelKind kind, double lengthscale, double variance) {
    if (!std::isfinite(variance) || variance < 0.0) {
        throw Error(ErrorCode::InvalidHyperparameter,
                    std::string(kernel_kind_name(kind)) + " variance must be >= 0, got " + format_double(variance));
    }
    const bool stationary = kind == KernelKind::Rbf || kind == KernelKind::Matern12 ||
                            kind == KernelKind::Matern32 || kind == KernelKind::Matern52;
    if (stationary && (!std::isfinite(lengthscale) || lengthscale <= 0.0)) {
        throw Error(ErrorCode::InvalidHyperparameter,
                    std::string(kernel_kind_name(kind)) + " lengthscale must be > 0, got " + format_double(lengthscale));
    }
}

double squared_distance(std::span<const double> x, std::span<const double> xp) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xp[i];
        s += d * d;
    }
    return s;
}

}  // namespace

KernelExpr::KernelExpr(KernelKind kind, double lengthscale, double variance)
    : kind_(kind), lengthscale_(lengthscale), variance_(variance) {}

KernelExpr KernelExpr::leaf(KernelKind kind, double lengthscale, double variance) {
    if (kind == KernelKind::Sum || kind == KernelKind::Product) {
        throw Error(ErrorCode::InvalidArgument, "leaf() called with a composite kind");
    }
    validate_leaf(kind, lengthscale, variance);
    const bool stationary = kind == KernelKind::Rbf || kind == KernelKind::Matern12 ||
                            kind == KernelKind::Matern32 || kind == KernelKind::Matern52;
    return KernelExpr(kind, stationary ? lengthscale : 1.0, variance);
}

KernelExpr KernelExpr::linear(double variance) { return leaf(KernelKind::Linear, 1.0, variance); }
KernelExpr KernelExpr::rbf(double ls, double variance) { return leaf(KernelKind::Rbf, ls, variance); }
KernelExpr KernelExpr::matern12(double ls, double variance) { return leaf(KernelKind::Matern12, ls, variance); }
KernelExpr KernelExpr::matern32(double ls, double variance) { return leaf(KernelKind::Matern32, ls, variance); }
KernelExpr KernelExpr::matern52(double ls, double variance) { return leaf(KernelKind::Matern52, ls, variance); }
KernelExpr KernelExpr::white(double variance) { return leaf(KernelKind::White, 1.0, variance); }
KernelExpr KernelExpr::bias(double variance) { return leaf(KernelKind::Bias, 1.0, variance); }

KernelExpr KernelExpr::sum(KernelExpr left, KernelExpr right) {
    KernelExpr k(KernelKind::Sum, 1.0, 1.0);
    k.left_ = std::make_shared<const KernelExpr>(std::move(left));
    k.right_ = std::make_shared<const KernelExpr>(std::move(right));
    return k;
}

KernelExpr KernelExpr::product(KernelExpr left, KernelExpr right) {
    KernelExpr k(KernelKind::Product, 1.0, 1.0);
    k.left_ = std::make_shared<const KernelExpr>(std::move(left));
    k.right_ = std::make_shared<const KernelExpr>(std::move(right));
    return k;
}

bool KernelExpr::has_lengthscale() const noexcept {
    return kind_ == KernelKind::Rbf || kind_ == KernelKind::Matern12 || kind_ == KernelKind::Matern32 ||
           kind_ == KernelKind::Matern52;
}

const KernelExpr& KernelExpr::left() const {
    if (!left_) throw Error(ErrorCode::InvalidArgument, "leaf kernel has no children");
    return *left_;
}

const KernelExpr& KernelExpr::right() const {
    if (!right_) throw Error(ErrorCode::InvalidArgument, "leaf kernel has no children");
    return *right_;
}

std::size_t KernelExpr::depth() const noexcept {
    if (is_leaf()) return 1;
    return 1 + std::max(left_->depth(), right_->depth());
}

double KernelExpr::operator()(std::span<const double> x, std::span<const double> xp) const {
    switch (kind_) {
        case KernelKind::Sum: return (*left_)(x, xp) + (*right_)(x, xp);
        case KernelKind::Product: return (*left_)(x, xp) * (*right_)(x, xp);
        case KernelKind::Linear: return variance_ * dot(x, xp);
        case KernelKind::Bias: return variance_;
        case KernelKind::White: return std::equal(x.begin(), x.end(), xp.begin()) ? variance_ : 0.0;
        case KernelKind::Rbf: {
            const double r2 = squared_distance(x, xp);
            return variance_ * std::exp(-0.5 * r2 / (lengthscale_ * lengthscale_));
        }
        case KernelKind::Matern12: {
            const double r = std::sqrt(squared_distance(x, xp));
            return variance_ * std::exp(-r / lengthscale_);
        }
        case KernelKind::Matern32: {
            const double u = std::sqrt(3.0) * std::sqrt(squared_distance(x, xp)) / lengthscale_;
            return variance_ * (1.0 + u) * std::exp(-u);
        }
        case KernelKind::Matern52: {
            const double u = std::sqrt(5.0) * std::sqrt(squared_distance(x, xp)) / lengthscale_;
            return variance_ * (1.0 + u + u * u / 3.0) * std::exp(-u);
        }
    }
    return 0.0;
}

KernelExpr KernelExpr::with_hyperparameters(double lengthscale, double variance) const {
    if (!is_leaf()) {
        auto l = left_->with_hyperparameters(lengthscale, variance);
        auto r = right_->with_hyperparameters(lengthscale, variance);
        return kind_ == KernelKind::Sum ? sum(std::move(l), std::move(r)) : product(std::move(l), std::move(r));
    }
    return leaf(kind_, has_lengthscale() ? lengthscale : 1.0, variance);
}

KernelExpr KernelExpr::with_lengthscale(double lengthscale) const {
    if (!is_leaf()) {
        auto l = left_->with_lengthscale(lengthscale);
        auto r = right_->with_lengthscale(lengthscale);
        return kind_ == KernelKind::Sum ? sum(std::move(l), std::move(r)) : product(std::move(l), std::move(r));
    }
    return leaf(kind_, has_lengthscale() ? lengthscale : 1.0, variance_);
}

bool operator==(const KernelExpr& a, const KernelExpr& b) {
    if (a.kind_ != b.kind_) return false;
    if (!a.is_leaf()) return *a.left_ == *b.left_ && *a.right_ == *b.right_;
    return a.lengthscale_ == b.lengthscale_ && a.variance_ == b.variance_;
}

double eval_kernel(const KernelExpr& k, std::span<const double> x, std::span<const double> xp) {
    if (x.size() != xp.size()) {
        throw Error(ErrorCode::DimensionMismatch, "kernel inputs of dimension " + std::to_string(x.size()) +
                                                      " and " + std::to_string(xp.size()));
    }
    return k(x, xp);
}

KernelMatrix kernel_matrix(const KernelExpr& k, const DenseMatrix& xs) {
    const std::size_t n = xs.rows();
    KernelMatrix out{DenseMatrix(n, n), true};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = k(xs.row(i), xs.row(j));
            out.m(i, j) = v;
            out.m(j, i) = v;
        }
    }
    return out;
}

KernelMatrix kernel_matrix(const KernelExpr& k, const DenseMatrix& xs, const DenseMatrix& xps) {
    if (&xs == &xps) return kernel_matrix(k, xs);
    if (xs.cols() != xps.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "kernel_matrix inputs with " + std::to_string(xs.cols()) +
                                                      " and " + std::to_string(xps.cols()) + " columns");
    }
    KernelMatrix out{DenseMatrix(xs.rows(), xps.rows()), false};
    for (std::size_t i = 0; i < xs.rows(); ++i)
        for (std::size_t j = 0; j < xps.rows(); ++j) out.m(i, j) = k(xs.row(i), xps.row(j));
    return out;
}

DenseVector kernel_diagonal(const KernelExpr& k, const DenseMatrix& xs) {
    DenseVector d(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i) d[i] = k(xs.row(i), xs.row(i));
    return d;
}

std::string_view kernel_kind_name(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::Matern12: return "matern12";
        case KernelKind::Matern32: return "matern32";
        case KernelKind::Matern52: return "matern52";
        case KernelKind::White: return "white";
        case KernelKind::Bias: return "bias";
        case KernelKind::Sum: return "sum";
        case KernelKind::Product: return "product";
    }
    return "?";
}


}  // namespace kremu
