#include "kremu/numerics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

namespace kremu {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, std::string(what) + " contains a non-finite entry");
        }
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::DimensionMismatch, message);
}

std::string shape(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DenseVector::DenseVector(std::size_t n, double fill) : data_(n, fill) {
    require_finite(data_, "vector");
}

DenseVector::DenseVector(std::vector<double> data) : data_(std::move(data)) {
    require_finite(data_, "vector");
}

DenseVector::DenseVector(std::initializer_list<double> values) : data_(values) {
    require_finite(data_, "vector");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    require_finite(data_, "matrix");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, "matrix data length does not match " +
                                             std::to_string(rows) + "x" + std::to_string(cols));
    require_finite(data_, "matrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    require_finite(m.span(), "matrix");
    return m;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), "matmul " + shape(a) + " * " + shape(b));
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
    require(a.cols() == x.size(), "matvec " + shape(a) + " * " + std::to_string(x.size()));
    DenseVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x.span());
    return y;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "add " + shape(a) + " + " + shape(b));
    DenseMatrix c = a;
    auto cs = c.span();
    auto bs = b.span();
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] += bs[i];
    return c;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "subtract " + shape(a) + " - " + shape(b));
    DenseMatrix c = a;
    auto cs = c.span();
    auto bs = b.span();
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] -= bs[i];
    return c;
}

DenseMatrix add_diagonal(const DenseMatrix& a, double value) {
    require(a.square(), "add_diagonal on " + shape(a));
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += value;
    return c;
}

DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> rows) {
    DenseMatrix out(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < a.rows(), "row index out of range");
        std::copy_n(a.row(rows[i]).begin(), a.cols(), out.row(i).begin());
    }
    return out;
}

DenseMatrix vstack(std::span<const DenseMatrix> parts) {
    if (parts.empty()) return {};
    const std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        require(p.cols() == cols, "vstack column mismatch");
        rows += p.rows();
    }
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& p : parts) data.insert(data.end(), p.span().begin(), p.span().end());
    return DenseMatrix(rows, cols, std::move(data));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot of lengths " + std::to_string(a.size()) + " and " +
                                      std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.span()); }

double trace(const DenseMatrix& a) {
    require(a.square(), "trace of " + shape(a));
    double t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

double mean(std::span<const double> a) {
    if (a.empty()) return 0.0;
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

bool is_symmetric(const DenseMatrix& a, double rel_tol) {
    if (!a.square()) return false;
    const double scale = norm_inf(a.span());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    return true;
}

double CholeskyFactor::half_log_det() const {
    double s = 0.0;
    for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return s;
}

namespace {

// Lower-triangle factorization of a + jitter*I into l. Returns false on a non-positive pivot.
bool try_factor(const DenseMatrix& a, double jitter, DenseMatrix& l) {
    const std::size_t n = a.rows();
    l = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        auto lj = l.row(j);
        double d = a(j, j) + jitter;
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        lj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            auto li = l.row(i);
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            li[j] = s / ljj;
        }
    }
    return true;
}

}  // namespace

CholeskyFactor cholesky(const DenseMatrix& a, const JitterPolicy& policy) {
    if (!a.square()) throw Error(ErrorCode::DimensionMismatch, "cholesky of " + shape(a));
    if (!is_symmetric(a)) throw Error(ErrorCode::NotSymmetric, "cholesky input is not symmetric");

    CholeskyFactor f;
    if (try_factor(a, 0.0, f.l)) return f;

    double mean_diag = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) mean_diag += a(i, i);
    mean_diag /= static_cast<double>(std::max<std::size_t>(a.rows(), 1));
    if (mean_diag > 0.0) {
        const double cap = policy.max_relative * mean_diag * (1.0 + 1e-12);
        for (double jitter = policy.initial_relative * mean_diag; jitter <= cap; jitter *= policy.growth) {
            if (try_factor(a, jitter, f.l)) {
                f.jitter_applied = jitter;
                return f;
            }
        }
    }
    throw Error(ErrorCode::NotPositiveDefinite,
                "matrix of size " + std::to_string(a.rows()) + " not positive definite after jitter ladder");
}

DenseVector solve_lower(const DenseMatrix& l, const DenseVector& b) {
    require(l.square() && l.rows() == b.size(), "solve_lower " + shape(l) + " with rhs " + std::to_string(b.size()));
    const std::size_t n = b.size();
    DenseVector x = b;
    for (std::size_t i = 0; i < n; ++i) {
        auto li = l.row(i);
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s / li[i];
    }
    return x;
}

DenseVector solve_lower_transposed(const DenseMatrix& l, const DenseVector& b) {
    require(l.square() && l.rows() == b.size(),
            "solve_lower_transposed " + shape(l) + " with rhs " + std::to_string(b.size()));
    const std::size_t n = b.size();
    DenseVector x = b;
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

DenseVector solve_cholesky(const CholeskyFactor& f, const DenseVector& b) {
    return solve_lower_transposed(f.l, solve_lower(f.l, b));
}

SymEigen sym_eigen(const DenseMatrix& input) {
    if (!input.square()) throw Error(ErrorCode::DimensionMismatch, "sym_eigen of " + shape(input));
    if (!is_symmetric(input)) throw Error(ErrorCode::NotSymmetric, "sym_eigen input is not symmetric");

    const std::size_t n = input.rows();
    DenseMatrix a = input;
    DenseMatrix v = DenseMatrix::identity(n);
    const double target = 1e-12 * frobenius_norm(input);
    constexpr int kMaxSweeps = 100;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    bool converged = false;
    for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
        if (off_norm() <= target) {
            converged = true;
            break;
        }
        if (sweep == kMaxSweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                auto ap = a.row(p);
                auto aq = a.row(q);
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = ap[k];
                    const double aqk = aq[k];
                    ap[k] = c * apk - s * aqk;
                    aq[k] = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    auto vk = v.row(k);
                    const double vkp = vk[p];
                    const double vkq = vk[q];
                    vk[p] = c * vkp - s * vkq;
                    vk[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "Jacobi sweeps exhausted");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymEigen out{DenseVector(n), DenseMatrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
    }
    return out;
}

}  // namespace kremu
