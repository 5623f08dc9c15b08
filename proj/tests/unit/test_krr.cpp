#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "../support.hpp"
#include "check.hpp"
#include "kremu/krr.hpp"

using namespace kremu;
using kremu::testing::random_matrix;
using kremu::testing::random_values;

TEST_SUITE("krr") {

TEST_CASE("scalar and white-kernel closed forms") {
    const KrrModel one = krr_fit(DenseMatrix{{0.0}}, DenseVector{2.0}, KernelExpr::rbf(), 1.0, KrrOptions{false, {}});
    CHECK(one.alpha[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one.bias == 0.0);

    const KrrModel w = krr_fit(DenseMatrix{{0.0}, {1.0}, {2.0}}, DenseVector{1.0, 4.0, 7.0}, KernelExpr::white(), 1.0);
    CHECK(w.bias == 4.0);
    CHECK(w.alpha[0] == doctest::Approx(-1.5));
    CHECK(w.alpha[1] == doctest::Approx(0.0));
    CHECK(w.alpha[2] == doctest::Approx(1.5));
}

TEST_CASE("alpha matches the explicit inverse") {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + rng() % 15;
        const DenseMatrix x = random_matrix(rng, n, 2);
        const DenseVector y(random_values(rng, n));
        const KernelExpr k = kremu::testing::random_pd_kernel(rng);
        const double lambda = 0.1;
        const KrrModel m = krr_fit(x, y, k, lambda);
        auto a = kremu::testing::to_ld(add_diagonal(kernel_matrix(k, x).m, lambda));
        kremu::testing::Matrix inv;
        REQUIRE(kremu::testing::gauss_jordan_inverse(a, inv));
        for (std::size_t i = 0; i < n; ++i) {
            long double ref = 0.0L;
            for (std::size_t j = 0; j < n; ++j) ref += inv[i][j] * (y[j] - m.bias);
            CHECK(std::abs(m.alpha[i] - static_cast<double>(ref)) <= 1e-8);
        }
        const DenseVector lhs = matvec(add_diagonal(kernel_matrix(k, x).m, lambda), m.alpha);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(lhs[i] - (y[i] - m.bias)) <= 1e-8);
    }
}

TEST_CASE("interpolation and shrinkage limits") {
    std::mt19937_64 rng(103);
    const DenseMatrix x = random_matrix(rng, 10, 2);
    const DenseVector y(random_values(rng, 10));
    const KernelExpr k = KernelExpr::matern12(0.5);
    const DenseVector interp = krr_predict(krr_fit(x, y, k, 1e-12), x);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(interp[i] - y[i]) <= 1e-6);
    const KrrModel big = krr_fit(x, y, k, 1e9);
    const DenseVector shrunk = krr_predict(big, random_matrix(rng, 5, 2));
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(shrunk[i] - big.bias) <= 1e-6);
}

TEST_CASE("alpha norm shrinks with lambda") {
    std::mt19937_64 rng(107);
    const DenseMatrix x = random_matrix(rng, 20, 3);
    const DenseVector y(random_values(rng, 20));
    double prev = INFINITY;
    for (double lambda : {1e-3, 1e-2, 1e-1, 1.0}) {
        const double nrm = norm2(krr_fit(x, y, KernelExpr::rbf(), lambda).alpha.span());
        CHECK(nrm <= prev);
        prev = nrm;
    }
}

TEST_CASE("fit, predict and CV errors") {
    CHECK_ERROR_CODE(krr_fit(DenseMatrix(0, 1), DenseVector{}, KernelExpr::rbf(), 1.0), ErrorCode::EmptyTrainingSet);
    CHECK_ERROR_CODE(krr_fit(DenseMatrix(1, 1), DenseVector{1.0}, KernelExpr::rbf(), 0.0),
                     ErrorCode::InvalidHyperparameter);
    const KrrModel m = krr_fit(DenseMatrix{{0.0}}, DenseVector{1.0}, KernelExpr::rbf(), 1.0);
    CHECK_ERROR_CODE(krr_predict(m, DenseMatrix(1, 3)), ErrorCode::DimensionMismatch);

    const DenseMatrix x(4, 1);
    const DenseVector y(4);
    CvGrid g{{1.0}, {KernelExpr::rbf()}, 5};
    CHECK_ERROR_CODE(krr_cv_select(x, y, g, 0), ErrorCode::TooFewSamples);
    CHECK_ERROR_CODE(krr_cv_select(x, y, CvGrid{{}, {KernelExpr::rbf()}, 2}, 0), ErrorCode::EmptyGrid);
    CHECK_ERROR_CODE(krr_cv_select(x, y, CvGrid{{1.0}, {}, 2}, 0), ErrorCode::EmptyGrid);
}

TEST_CASE("folds partition the samples") {
    for (std::size_t n : {5u, 7u, 23u}) {
        const auto folds = cv_folds(n, 5, 9);
        REQUIRE(folds.size() == 5);
        std::set<std::size_t> seen;
        std::size_t lo = n, hi = 0;
        for (const auto& f : folds) {
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
            seen.insert(f.begin(), f.end());
        }
        CHECK(seen.size() == n);
        CHECK(hi - lo <= 1);
    }
    CHECK(cv_folds(23, 5, 9) == cv_folds(23, 5, 9));
    CHECK(cv_folds(23, 5, 9) != cv_folds(23, 5, 10));
}

TEST_CASE("CV with one candidate equals a direct fit") {
    std::mt19937_64 rng(109);
    const DenseMatrix x = random_matrix(rng, 12, 2);
    const DenseVector y(random_values(rng, 12));
    const CvResult r = krr_cv_select(x, y, CvGrid{{0.1}, {KernelExpr::rbf(2.0)}, 3}, 4);
    const KrrModel direct = krr_fit(x, y, KernelExpr::rbf(2.0), 0.1);
    CHECK(r.model.alpha == direct.alpha);
    CHECK(r.model.bias == direct.bias);
    REQUIRE(r.cv_table.size() == 1);
    CHECK(r.best_index == 0);
}

TEST_CASE("CV is deterministic and its table is well formed") {
    std::mt19937_64 rng(113);
    const DenseMatrix x = random_matrix(rng, 30, 2);
    const DenseVector y(random_values(rng, 30));
    const CvGrid g = CvGrid::defaults();
    const CvResult a = krr_cv_select(x, y, g, 77);
    const CvResult b = krr_cv_select(x, y, g, 77);
    REQUIRE(a.cv_table.size() == g.lambdas.size() * g.kernel_candidates.size());
    CHECK(a.best_index == b.best_index);
    for (std::size_t i = 0; i < a.cv_table.size(); ++i) {
        CHECK(a.cv_table[i].mean_rmse == b.cv_table[i].mean_rmse);
        CHECK(std::isfinite(a.cv_table[i].mean_rmse));
        CHECK(a.cv_table[i].mean_rmse >= 0.0);
        CHECK(a.cv_table[i].mean_rmse >= a.cv_table[a.best_index].mean_rmse);
    }
    // (kernel outer, lambda inner) ordering
    CHECK(a.cv_table[1].kernel == g.kernel_candidates[0]);
    CHECK(a.cv_table[1].lambda == g.lambdas[1]);
    CHECK(a.cv_table[g.lambdas.size()].kernel == g.kernel_candidates[1]);
}

TEST_CASE("CV prefers moderate regularization on noisy smooth data") {
    std::mt19937_64 rng(127);
    std::normal_distribution<double> noise(0.0, 0.3);
    int middle = 0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const DenseMatrix x = random_matrix(rng, 40, 1, -3.0, 3.0);
        DenseVector y(40);
        for (std::size_t i = 0; i < 40; ++i) y[i] = std::sin(x(i, 0)) + noise(rng);
        const CvResult res = krr_cv_select(x, y, CvGrid{{1e-6, 1e-2, 1e2}, {KernelExpr::rbf()}, 5}, rng());
        if (res.model.lambda == 1e-2) ++middle;
    }
    MESSAGE("middle lambda selected in " << middle << " of " << reps);
    CHECK(middle >= 40);
}

}  // TEST_SUITE
