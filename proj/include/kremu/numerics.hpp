#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "kremu/error.hpp"

namespace kremu {

class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t n, double fill = 0.0);
    explicit DenseVector(std::vector<double> data);
    DenseVector(std::initializer_list<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] std::span<double> span() noexcept { return data_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    bool operator==(const DenseVector&) const = default;

private:
    std::vector<double> data_;
};

/// Row-major matrix of doubles. Entries are checked finite on construction.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
    [[nodiscard]] std::span<double> span() noexcept { return data_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Basic algebra. All of these throw DimensionMismatch on incompatible shapes.
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add_diagonal(const DenseMatrix& a, double value);
DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> rows);
DenseMatrix vstack(std::span<const DenseMatrix> parts);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
double frobenius_norm(const DenseMatrix& a);
double trace(const DenseMatrix& a);
double mean(std::span<const double> a);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// |a_ij - a_ji| <= rel_tol * max|a| for every pair.
bool is_symmetric(const DenseMatrix& a, double rel_tol = 1e-12);

struct JitterPolicy {
    double initial_relative = 1e-10;  // first jitter, as a fraction of mean(diag)
    double growth = 10.0;
    double max_relative = 1e-4;       // last rung of the ladder
};

struct CholeskyFactor {
    DenseMatrix l;
    double jitter_applied = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return l.rows(); }
    /// sum_i log l_ii
    [[nodiscard]] double half_log_det() const;
};

/// Factor a (plus the smallest ladder jitter that works) as l * l^T.
/// Throws NotSymmetric, or NotPositiveDefinite once the ladder is exhausted.
CholeskyFactor cholesky(const DenseMatrix& a, const JitterPolicy& policy = {});

/// Solves l * x = b.
DenseVector solve_lower(const DenseMatrix& l, const DenseVector& b);
/// Solves l^T * x = b.
DenseVector solve_lower_transposed(const DenseMatrix& l, const DenseVector& b);
DenseVector solve_cholesky(const CholeskyFactor& f, const DenseVector& b);

struct SymEigen {
    DenseVector values;   // descending
    DenseMatrix vectors;  // column i pairs with values[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEigen sym_eigen(const DenseMatrix& a);

}  // namespace kremu
