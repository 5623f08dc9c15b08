// Test-only oracles and random generators. Nothing here is used by the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "kremu/kernels.hpp"
#include "kremu/numerics.hpp"

namespace kremu::testing {

using Matrix = std::vector<std::vector<long double>>;

inline Matrix to_ld(const DenseMatrix& a) {
    Matrix m(a.rows(), std::vector<long double>(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
    return m;
}

/// Gauss-Jordan inverse with partial pivoting in long double. Returns false if singular.
inline bool gauss_jordan_inverse(Matrix a, Matrix& inv) {
    const std::size_t n = a.size();
    inv.assign(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (std::fabs(a[piv][c]) < 1e-300L) return false;
        std::swap(a[piv], a[c]);
        std::swap(inv[piv], inv[c]);
        const long double d = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0.0L) continue;
            const long double f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return true;
}

/// Solves a x = b by Gauss-Jordan; false when singular (|pivot| <= tol * max|a|).
inline bool gauss_solve(Matrix a, std::vector<long double> b, std::vector<long double>& x, long double tol = 1e-13L) {
    const std::size_t n = a.size();
    long double scale = 0.0L;
    for (const auto& row : a)
        for (long double v : row) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0L) scale = 1.0L;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (std::fabs(a[piv][c]) <= tol * scale) return false;
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

struct Conditioned {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// mu* = K*^T (K + s I)^-1 y,  var* = k** - diag(K*^T (K + s I)^-1 K*), via an explicit inverse.
inline Conditioned condition_oracle(const KernelExpr& k, const DenseMatrix& x, const std::vector<double>& y,
                                    double noise, const DenseMatrix& xq) {
    const std::size_t n = x.rows();
    Matrix kk(n, std::vector<long double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) kk[i][j] = k(x.row(i), x.row(j)) + (i == j ? noise : 0.0);
    Matrix inv;
    if (!gauss_jordan_inverse(kk, inv)) return {};
    Conditioned out;
    for (std::size_t q = 0; q < xq.rows(); ++q) {
        std::vector<long double> ks(n);
        for (std::size_t i = 0; i < n; ++i) ks[i] = k(x.row(i), xq.row(q));
        long double mu = 0.0L, quad = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            long double w = 0.0L;
            for (std::size_t j = 0; j < n; ++j) w += inv[i][j] * ks[j];
            mu += w * y[i];
            quad += w * ks[i];
        }
        out.mean.push_back(static_cast<double>(mu));
        out.variance.push_back(static_cast<double>(k(xq.row(q), xq.row(q)) - quad));
    }
    return out;
}

/// -1/2 b'Kb - eps |b|_1 + y'b
inline long double svr_objective(const Matrix& k, const std::vector<double>& y, double eps,
                                 const std::vector<long double>& b) {
    long double q = 0.0L, l1 = 0.0L, lin = 0.0L;
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) q += b[i] * k[i][j] * b[j];
        l1 += std::fabs(b[i]);
        lin += y[i] * b[i];
    }
    return -0.5L * q - eps * l1 + lin;
}

struct SvrOracle {
    long double objective = -std::numeric_limits<long double>::infinity();
    std::vector<long double> beta;
    std::size_t feasible_sets = 0;
};

/// Exact maximizer of the epsilon-SVR dual for tiny n by active-set enumeration.
/// Each coordinate is one of {-C, 0, +C, free positive, free negative}. For a given assignment,
/// stationarity on the free set with the equality multiplier b is the linear system
///   [K_FF 1; 1' 0] [beta_F; b] = [y_F - eps s_F - K_F,fixed beta_fixed; -sum beta_fixed].
/// Every feasible candidate is a feasible dual point, and the optimum satisfies KKT for some
/// assignment, so the best feasible candidate is the optimum.
inline SvrOracle svr_active_set_oracle(const DenseMatrix& gram, const std::vector<double>& y, double eps, double c) {
    const std::size_t n = y.size();
    const Matrix k = to_ld(gram);
    SvrOracle best;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 5;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<int> state(n);
        std::size_t rest = code;
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = static_cast<int>(rest % 5);
            rest /= 5;
        }
        std::vector<long double> beta(n, 0.0L);
        std::vector<std::size_t> free;
        std::vector<long double> sign;
        for (std::size_t i = 0; i < n; ++i) {
            switch (state[i]) {
                case 0: beta[i] = -c; break;
                case 1: beta[i] = 0.0L; break;
                case 2: beta[i] = c; break;
                case 3: free.push_back(i); sign.push_back(1.0L); break;
                default: free.push_back(i); sign.push_back(-1.0L); break;
            }
        }
        long double fixed_sum = 0.0L;
        for (std::size_t i = 0; i < n; ++i) fixed_sum += beta[i];
        if (free.empty()) {
            if (std::fabs(fixed_sum) > 1e-12L) continue;
        } else {
            const std::size_t m = free.size();
            Matrix a(m + 1, std::vector<long double>(m + 1, 0.0L));
            std::vector<long double> rhs(m + 1, 0.0L);
            for (std::size_t r = 0; r < m; ++r) {
                const std::size_t i = free[r];
                for (std::size_t s = 0; s < m; ++s) a[r][s] = k[i][free[s]];
                a[r][m] = 1.0L;
                long double fixed_part = 0.0L;
                for (std::size_t j = 0; j < n; ++j) fixed_part += k[i][j] * beta[j];
                rhs[r] = y[i] - eps * sign[r] - fixed_part;
            }
            for (std::size_t s = 0; s < m; ++s) a[m][s] = 1.0L;
            rhs[m] = -fixed_sum;
            std::vector<long double> sol;
            if (!gauss_solve(a, rhs, sol)) continue;
            bool ok = true;
            for (std::size_t r = 0; r < m && ok; ++r) {
                const long double v = sol[r];
                ok = sign[r] > 0 ? (v >= -1e-12L && v <= c + 1e-12L) : (v <= 1e-12L && v >= -c - 1e-12L);
                beta[free[r]] = std::clamp<long double>(v, -c, c);
            }
            if (!ok) continue;
            long double s = 0.0L;
            for (long double v : beta) s += v;
            if (std::fabs(s) > 1e-9L * std::max<long double>(1.0L, c)) continue;
        }
        ++best.feasible_sets;
        const long double obj = svr_objective(k, y, eps, beta);
        if (obj > best.objective) {
            best.objective = obj;
            best.beta = beta;
        }
    }
    return best;
}

/// Exhaustive grid search over the feasible set {sum beta = 0, |beta_i| <= C} with repeated
/// zoom-in around the best point. Independent of the active-set oracle; used to cross-check it.
inline long double svr_grid_oracle(const DenseMatrix& gram, const std::vector<double>& y, double eps, double c,
                                   int points = 41, int zooms = 30) {
    const std::size_t n = y.size();
    const Matrix k = to_ld(gram);
    if (n == 1) return 0.0L;
    const std::size_t dims = n - 1;  // last coordinate fixed by the equality constraint
    std::vector<long double> center(dims, 0.0L);
    long double half = c;
    long double best = -std::numeric_limits<long double>::infinity();
    std::vector<long double> best_b(dims, 0.0L);
    for (int z = 0; z < zooms; ++z) {
        std::size_t total = 1;
        for (std::size_t d = 0; d < dims; ++d) total *= static_cast<std::size_t>(points);
        for (std::size_t code = 0; code < total; ++code) {
            std::vector<long double> b(n, 0.0L);
            std::size_t rest = code;
            bool ok = true;
            long double s = 0.0L;
            for (std::size_t d = 0; d < dims; ++d) {
                const long double t = static_cast<long double>(rest % points) / (points - 1);
                rest /= points;
                b[d] = center[d] - half + 2.0L * half * t;
                if (b[d] < -c || b[d] > c) ok = false;
                s += b[d];
            }
            b[n - 1] = -s;
            if (!ok || b[n - 1] < -c || b[n - 1] > c) continue;
            const long double obj = svr_objective(k, y, eps, b);
            if (obj > best) {
                best = obj;
                best_b.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(dims));
            }
        }
        center = best_b;
        half *= 0.6L;
    }
    return best;
}

/// Random kernel tree with leaves drawn from the catalog (optionally without White).
inline KernelExpr random_kernel(std::mt19937_64& rng, int depth, bool allow_white) {
    std::uniform_real_distribution<double> ls(0.3, 3.0), var(0.1, 2.0);
    std::uniform_int_distribution<int> coin(0, 2);
    if (depth > 1 && coin(rng) != 0) {
        KernelExpr l = random_kernel(rng, depth - 1, allow_white);
        KernelExpr r = random_kernel(rng, depth - 1, allow_white);
        return std::uniform_int_distribution<int>(0, 1)(rng) ? KernelExpr::sum(std::move(l), std::move(r))
                                                             : KernelExpr::product(std::move(l), std::move(r));
    }
    const int kinds = allow_white ? 7 : 6;
    switch (std::uniform_int_distribution<int>(0, kinds - 1)(rng)) {
        case 0: return KernelExpr::linear(var(rng));
        case 1: return KernelExpr::rbf(ls(rng), var(rng));
        case 2: return KernelExpr::matern12(ls(rng), var(rng));
        case 3: return KernelExpr::matern32(ls(rng), var(rng));
        case 4: return KernelExpr::matern52(ls(rng), var(rng));
        case 5: return KernelExpr::bias(var(rng));
        default: return KernelExpr::white(var(rng));
    }
}

/// Stationary, strictly positive definite leaf.
inline KernelExpr random_pd_kernel(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ls(0.5, 2.5), var(0.5, 2.0);
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: return KernelExpr::rbf(ls(rng), var(rng));
        case 1: return KernelExpr::matern12(ls(rng), var(rng));
        case 2: return KernelExpr::matern32(ls(rng), var(rng));
        default: return KernelExpr::matern52(ls(rng), var(rng));
    }
}

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    DenseMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("kremu_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace kremu::testing
