#pragma once

#include <cstddef>

#include "kremu/numerics.hpp"

namespace kremu {

/// Leading spatial patterns of a set of fields (one field per row).
struct EofBasis {
    DenseVector mean_field;       // length = gridpoints
    DenseMatrix components;       // k x gridpoints, orthonormal rows
    DenseVector singular_values;  // descending, length k
    double total_variance = 0.0;  // sum of all squared singular values of the centered data
    std::size_t k = 0;

    [[nodiscard]] std::size_t gridpoints() const noexcept { return mean_field.size(); }
    /// s_i^2 / total for each retained component.
    [[nodiscard]] DenseVector explained_variance_ratio() const;
};

/// PCA through the eigendecomposition of the centered sample Gram matrix.
/// Each component's largest-magnitude entry (lowest index on ties) is made positive.
EofBasis eof_fit(const DenseMatrix& fields, std::size_t k);

/// (fields - mean_field) * components^T
DenseMatrix eof_project(const EofBasis& b, const DenseMatrix& fields);

/// coeffs * components + mean_field
DenseMatrix eof_reconstruct(const EofBasis& b, const DenseMatrix& coeffs);

}  // namespace kremu
