#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "kremu/numerics.hpp"

namespace kremu {

enum class KernelKind { Linear, Rbf, Matern12, Matern32, Matern52, White, Bias, Sum, Product };

/// Immutable covariance-function expression: a catalog leaf or a sum/product of two subtrees.
///
/// Leaves carry an isotropic lengthscale (stationary kernels only) and a variance.
/// Copies share subtrees, which is safe since nodes never change after construction.
class KernelExpr {
public:
    static KernelExpr linear(double variance = 1.0);
    static KernelExpr rbf(double lengthscale = 1.0, double variance = 1.0);
    static KernelExpr matern12(double lengthscale = 1.0, double variance = 1.0);
    static KernelExpr matern32(double lengthscale = 1.0, double variance = 1.0);
    static KernelExpr matern52(double lengthscale = 1.0, double variance = 1.0);
    static KernelExpr white(double variance = 1.0);
    static KernelExpr bias(double variance = 1.0);
    static KernelExpr leaf(KernelKind kind, double lengthscale, double variance);
    static KernelExpr sum(KernelExpr left, KernelExpr right);
    static KernelExpr product(KernelExpr left, KernelExpr right);

    [[nodiscard]] KernelKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_leaf() const noexcept { return kind_ != KernelKind::Sum && kind_ != KernelKind::Product; }
    [[nodiscard]] bool has_lengthscale() const noexcept;
    [[nodiscard]] double lengthscale() const noexcept { return lengthscale_; }
    [[nodiscard]] double variance() const noexcept { return variance_; }
    [[nodiscard]] const KernelExpr& left() const;
    [[nodiscard]] const KernelExpr& right() const;
    [[nodiscard]] std::size_t depth() const noexcept;

    [[nodiscard]] double operator()(std::span<const double> x, std::span<const double> xp) const;

    /// Copy with every lengthscale-bearing leaf set to `lengthscale` and every leaf's variance set to `variance`.
    [[nodiscard]] KernelExpr with_hyperparameters(double lengthscale, double variance) const;
    [[nodiscard]] KernelExpr with_lengthscale(double lengthscale) const;

    /// Structural equality with exact hyperparameter comparison.
    friend bool operator==(const KernelExpr& a, const KernelExpr& b);

private:
    KernelExpr(KernelKind kind, double lengthscale, double variance);

    KernelKind kind_;
    double lengthscale_ = 1.0;
    double variance_ = 1.0;
    std::shared_ptr<const KernelExpr> left_;
    std::shared_ptr<const KernelExpr> right_;
};

double eval_kernel(const KernelExpr& k, std::span<const double> x, std::span<const double> xp);

struct KernelMatrix {
    DenseMatrix m;
    bool symmetric = false;
};

/// Self-covariance over the rows of xs; each unordered pair is evaluated once and mirrored.
KernelMatrix kernel_matrix(const KernelExpr& k, const DenseMatrix& xs);
/// Cross-covariance, entry (i, j) = k(xs_i, xps_j). Falls through to the self form when both refer to one object.
KernelMatrix kernel_matrix(const KernelExpr& k, const DenseMatrix& xs, const DenseMatrix& xps);
/// k(x_i, x_i) for every row.
DenseVector kernel_diagonal(const KernelExpr& k, const DenseMatrix& xs);

/// Kernel DSL:
///   expr := term ('+' term)*
///   term := atom ('*' atom)*
///   atom := NAME '(' kv (',' kv)* ')' | '(' expr ')'
///   kv   := ('ls' | 'var') '=' FLOAT
/// Names: linear, rbf, exp, matern12, matern32, matern52, white, bias. Missing ls/var default to 1.
KernelExpr parse_kernel(std::string_view text);
std::string print_kernel(const KernelExpr& k);

std::string_view kernel_kind_name(KernelKind kind) noexcept;

}  // namespace kremu
