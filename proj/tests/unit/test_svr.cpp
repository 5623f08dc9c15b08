#include <algorithm>
#include <cmath>
#include <random>

#include "../support.hpp"
#include "check.hpp"
#include "kremu/svr.hpp"

using namespace kremu;
using kremu::testing::random_matrix;
using kremu::testing::random_values;

namespace {

std::size_t support_count(const SvrFitResult& r) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < r.beta.size(); ++i) n += r.beta[i] != 0.0;
    return n;
}

void check_kkt(const SvrFitResult& r, const DenseMatrix& x, const DenseVector& y, double eps, double c, double tol) {
    const DenseVector f = svr_predict(r.model, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double resid = std::abs(y[i] - f[i]);
        const double b = std::abs(r.beta[i]);
        if (b == 0.0) CHECK(resid <= eps + tol);
        else if (b >= c) CHECK(resid >= eps - tol);
        else CHECK(std::abs(resid - eps) <= tol);
    }
}

}  // namespace

TEST_SUITE("svr") {

TEST_CASE("constant targets inside the tube") {
    const DenseMatrix x{{0.0}, {1.0}, {2.0}, {3.0}};
    const DenseVector y(4, 1.0);
    const SvrFitResult r = svr_fit(x, y, KernelExpr::rbf(), 0.5, 1.0);
    CHECK(r.converged);
    CHECK(r.model.dual_coef.size() == 0);
    CHECK(r.model.bias == doctest::Approx(1.0));
    const DenseVector f = svr_predict(r.model, DenseMatrix{{-5.0}, {1.5}, {9.0}});
    for (std::size_t i = 0; i < 3; ++i) CHECK(f[i] == doctest::Approx(1.0));
}

TEST_CASE("two-point linear problem") {
    const DenseMatrix x{{0.0}, {1.0}};
    const DenseVector y{-1.0, 1.0};
    const SvrFitResult r = svr_fit(x, y, KernelExpr::linear(), 0.0, 1e6);
    CHECK(r.converged);
    const DenseVector f = svr_predict(r.model, DenseMatrix{{0.0}, {1.0}, {0.5}});
    CHECK(std::abs(f[0] + 1.0) <= 1e-4);
    CHECK(std::abs(f[1] - 1.0) <= 1e-4);
    CHECK(std::abs(f[2]) <= 1e-4);

    // Independent check: 1-D grid over beta_2 = -beta_1 = t, refined around the best point.
    const DenseMatrix gram = kernel_matrix(KernelExpr::linear(), x).m;
    const long double grid_best = kremu::testing::svr_grid_oracle(gram, y.values(), 0.0, 1e6, 2001, 60);
    CHECK(std::abs(static_cast<long double>(r.dual_objective) - grid_best) <= 1e-4L);
}

TEST_CASE("dual feasibility and monotone objective along the trace") {
    std::mt19937_64 rng(131);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 5 + rng() % 25;
        const DenseMatrix x = random_matrix(rng, n, 2);
        const DenseVector y(random_values(rng, n, -2.0, 2.0));
        SvrOptions opt;
        opt.record_trace = true;
        const double c = 0.5 + 3.0 * std::uniform_real_distribution<double>()(rng);
        const SvrFitResult r = svr_fit(x, y, KernelExpr::matern32(), 0.1, c, opt);
        CHECK(r.converged);
        REQUIRE(r.trace.objective.size() == r.iterations);
        for (std::size_t i = 0; i < r.iterations; ++i) {
            CHECK(r.trace.equality_residual[i] <= 1e-10);
            CHECK(r.trace.box_excess[i] == 0.0);
            if (i > 0) CHECK(r.trace.objective[i] >= r.trace.objective[i - 1] - 1e-12);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += r.beta[i];
            CHECK(std::abs(r.beta[i]) <= c);
        }
        CHECK(std::abs(s) <= 1e-8);
        check_kkt(r, x, y, 0.1, c, 1e-3);
    }
}

TEST_CASE("SMO reaches the exact small-problem optimum") {
    std::mt19937_64 rng(137);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng() % 3;
        const DenseMatrix x = random_matrix(rng, n, 1, -2.0, 2.0);
        const DenseVector y(random_values(rng, n, -2.0, 2.0));
        const KernelExpr k = kremu::testing::random_pd_kernel(rng);
        const double eps = 0.05 + 0.2 * std::uniform_real_distribution<double>()(rng);
        const double c = 0.2 + 2.0 * std::uniform_real_distribution<double>()(rng);
        const SvrFitResult r = svr_fit(x, y, k, eps, c);
        const DenseMatrix gram = kernel_matrix(k, x).m;
        DenseVector yc = y;
        const double ym = mean(y.span());
        for (std::size_t i = 0; i < n; ++i) yc[i] -= ym;
        const auto oracle = kremu::testing::svr_active_set_oracle(gram, yc.values(), eps, c);
        REQUIRE(oracle.feasible_sets > 0);
        CHECK(std::abs(static_cast<long double>(r.dual_objective) - oracle.objective) <= 1e-4L);
        CHECK(std::abs(svr_dual_objective(gram, yc, eps, r.beta) - r.dual_objective) <= 1e-12);
        check_kkt(r, x, y, eps, c, 1e-3);
    }
}

TEST_CASE("support count does not grow with epsilon") {
    std::mt19937_64 rng(139);
    const DenseMatrix x = random_matrix(rng, 30, 1, -3.0, 3.0);
    DenseVector y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = std::sin(x(i, 0)) + 0.1 * std::normal_distribution<double>()(rng);
    std::size_t prev = 31;
    for (double eps : {0.05, 0.2, 0.5}) {
        const SvrFitResult r = svr_fit(x, y, KernelExpr::rbf(), eps, 5.0);
        CHECK(support_count(r) <= prev);
        prev = support_count(r);
    }
    const SvrFitResult wide = svr_fit(x, y, KernelExpr::rbf(), 10.0, 5.0);
    CHECK(support_count(wide) == 0);
    // No free vectors: the bias sits at the midpoint of the feasible interval, the midrange of y.
    const auto [lo, hi] = std::minmax_element(y.values().begin(), y.values().end());
    CHECK(wide.model.bias == doctest::Approx(0.5 * (*lo + *hi)));
}

TEST_CASE("prediction with no or a single support vector") {
    SvrModel empty;
    empty.x_support = DenseMatrix(0, 1);
    empty.bias = 2.5;
    empty.kernel = KernelExpr::rbf();
    CHECK(svr_predict(empty, DenseMatrix{{0.0}, {4.0}}) == DenseVector{2.5, 2.5});

    SvrModel one;
    one.x_support = DenseMatrix{{1.0}};
    one.dual_coef = DenseVector{0.75};
    one.bias = 1.0;
    one.kernel = KernelExpr::white();
    CHECK(svr_predict(one, DenseMatrix{{1.0}, {2.0}}) == DenseVector{1.75, 1.0});
    CHECK_ERROR_CODE(svr_predict(one, DenseMatrix(1, 2)), ErrorCode::DimensionMismatch);
}

TEST_CASE("max_iter is reported, not thrown") {
    std::mt19937_64 rng(149);
    const DenseMatrix x = random_matrix(rng, 40, 2);
    const DenseVector y(random_values(rng, 40, -3.0, 3.0));
    SvrOptions opt;
    opt.max_iter = 2;
    const SvrFitResult r = svr_fit(x, y, KernelExpr::rbf(0.3), 0.01, 10.0, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
    CHECK(r.max_violation > opt.tol);
}

TEST_CASE("hyperparameter errors") {
    const DenseMatrix x{{0.0}};
    const DenseVector y{1.0};
    CHECK_ERROR_CODE(svr_fit(x, y, KernelExpr::rbf(), -0.1, 1.0), ErrorCode::InvalidHyperparameter);
    CHECK_ERROR_CODE(svr_fit(x, y, KernelExpr::rbf(), 0.1, 0.0), ErrorCode::InvalidHyperparameter);
    CHECK_ERROR_CODE(svr_fit(DenseMatrix(0, 1), DenseVector{}, KernelExpr::rbf(), 0.1, 1.0),
                     ErrorCode::EmptyTrainingSet);
}

}  // TEST_SUITE
