#include "kremu/reduce.hpp"

#include <algorithm>
#include <cmath>

namespace kremu {

namespace {

// Makes row r of `rows` orthogonal to rows [0, r) and unit length. Returns the norm before scaling.
double orthonormalize_row(DenseMatrix& rows, std::size_t r) {
    auto v = rows.row(r);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t q = 0; q < r; ++q) {
            auto u = rows.row(q);
            const double proj = dot(u, v);
            for (std::size_t g = 0; g < v.size(); ++g) v[g] -= proj * u[g];
        }
    }
    const double norm = norm2(v);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return norm;
}

void fix_sign(std::span<double> v) {
    std::size_t arg = 0;
    for (std::size_t g = 1; g < v.size(); ++g)
        if (std::abs(v[g]) > std::abs(v[arg])) arg = g;
    if (v[arg] < 0.0)
        for (double& x : v) x = -x;
}

}  // namespace

DenseVector EofBasis::explained_variance_ratio() const {
    DenseVector out(k);
    if (total_variance <= 0.0) return out;
    for (std::size_t i = 0; i < k; ++i) out[i] = singular_values[i] * singular_values[i] / total_variance;
    return out;
}

EofBasis eof_fit(const DenseMatrix& fields, std::size_t k) {
    const std::size_t n = fields.rows();
    const std::size_t p = fields.cols();
    if (n == 0 || p == 0) throw Error(ErrorCode::EmptyInput, "EOF fit needs at least one field and gridpoint");
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "EOF component count must be >= 1");
    if (k > std::min(n, p)) {
        throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds min(samples, gridpoints) = " +
                                              std::to_string(std::min(n, p)));
    }

    EofBasis b;
    b.k = k;
    b.mean_field = DenseVector(p);
    for (std::size_t s = 0; s < n; ++s) {
        auto row = fields.row(s);
        for (std::size_t g = 0; g < p; ++g) b.mean_field[g] += row[g];
    }
    for (std::size_t g = 0; g < p; ++g) b.mean_field[g] /= static_cast<double>(n);

    DenseMatrix centered = fields;
    for (std::size_t s = 0; s < n; ++s) {
        auto row = centered.row(s);
        for (std::size_t g = 0; g < p; ++g) row[g] -= b.mean_field[g];
    }

    DenseMatrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = dot(centered.row(i), centered.row(j));
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    b.total_variance = trace(gram);
    const SymEigen eig = sym_eigen(gram);

    // Patterns with s_i below this relative level are numerically null and are replaced
    // by an orthonormal completion so that k = min(n, p) still spans the data.
    const double lead = std::max(eig.values[0], 0.0);
    const double null_level = 1e-24 * lead;

    b.components = DenseMatrix(k, p);
    b.singular_values = DenseVector(k);
    std::size_t filled = 0;
    for (; filled < k; ++filled) {
        const double lambda = eig.values[filled];
        if (!(lambda > null_level) || lead == 0.0) break;
        const double s = std::sqrt(lambda);
        auto v = b.components.row(filled);
        for (std::size_t r = 0; r < n; ++r) {
            const double u = eig.vectors(r, filled) / s;
            if (u == 0.0) continue;
            auto row = centered.row(r);
            for (std::size_t g = 0; g < p; ++g) v[g] += u * row[g];
        }
        orthonormalize_row(b.components, filled);
        b.singular_values[filled] = s;
    }
    for (std::size_t candidate = 0; filled < k && candidate < p; ++candidate) {
        auto v = b.components.row(filled);
        std::fill(v.begin(), v.end(), 0.0);
        v[candidate] = 1.0;
        if (orthonormalize_row(b.components, filled) > 0.5) {
            b.singular_values[filled] = 0.0;
            ++filled;
        }
    }
    for (std::size_t i = 0; i < k; ++i) fix_sign(b.components.row(i));
    return b;
}

DenseMatrix eof_project(const EofBasis& b, const DenseMatrix& fields) {
    if (fields.cols() != b.gridpoints()) {
        throw Error(ErrorCode::DimensionMismatch, "fields have " + std::to_string(fields.cols()) +
                                                      " gridpoints, basis has " + std::to_string(b.gridpoints()));
    }
    DenseMatrix coeffs(fields.rows(), b.k);
    std::vector<double> anomaly(b.gridpoints());
    for (std::size_t s = 0; s < fields.rows(); ++s) {
        auto row = fields.row(s);
        for (std::size_t g = 0; g < anomaly.size(); ++g) anomaly[g] = row[g] - b.mean_field[g];
        for (std::size_t i = 0; i < b.k; ++i) coeffs(s, i) = dot(anomaly, b.components.row(i));
    }
    return coeffs;
}

DenseMatrix eof_reconstruct(const EofBasis& b, const DenseMatrix& coeffs) {
    if (coeffs.cols() != b.k) {
        throw Error(ErrorCode::DimensionMismatch, "coefficients have width " + std::to_string(coeffs.cols()) +
                                                      ", basis has k = " + std::to_string(b.k));
    }
    DenseMatrix fields(coeffs.rows(), b.gridpoints());
    for (std::size_t s = 0; s < coeffs.rows(); ++s) {
        auto out = fields.row(s);
        std::copy(b.mean_field.span().begin(), b.mean_field.span().end(), out.begin());
        for (std::size_t i = 0; i < b.k; ++i) {
            const double c = coeffs(s, i);
            auto comp = b.components.row(i);
            for (std::size_t g = 0; g < out.size(); ++g) out[g] += c * comp[g];
        }
    }
    return fields;
}

}  // namespace kremu
