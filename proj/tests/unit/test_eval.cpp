#include <cmath>
#include <numeric>
#include <random>

#include "../support.hpp"
#include "check.hpp"
#include "kremu/eval.hpp"

using namespace kremu;

namespace {

ScenarioDataset field_dataset(const Grid& grid, std::vector<int> years, Variable v, const DenseMatrix& fields) {
    ScenarioDataset d;
    d.name = "fields";
    d.grid = grid;
    d.years = std::move(years);
    d.co2.assign(d.years.size(), 1.0);
    d.ch4.assign(d.years.size(), 1.0);
    d.so2 = DenseMatrix(d.years.size(), grid.cells());
    d.bc = DenseMatrix(d.years.size(), grid.cells());
    d.set_output(v, fields);
    return d;
}

std::vector<int> year_range(int a, int b) {
    std::vector<int> y(static_cast<std::size_t>(b - a + 1));
    std::iota(y.begin(), y.end(), a);
    return y;
}

// Outputs are exact affine functions of the four global-mean forcings.
ScenarioDataset linear_scenario(std::mt19937_64& rng, const Grid& grid, const std::vector<DenseVector>& patterns) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScenarioDataset d;
    d.name = "linear";
    d.grid = grid;
    d.years = year_range(2041, 2100);
    const std::size_t n = d.years.size(), g = grid.cells();
    d.so2 = DenseMatrix(n, g);
    d.bc = DenseMatrix(n, g);
    for (std::size_t t = 0; t < n; ++t) {
        d.co2.push_back(2.0 * u(rng));
        d.ch4.push_back(1.0 + u(rng));
        for (std::size_t c = 0; c < g; ++c) {
            d.so2(t, c) = u(rng);
            d.bc(t, c) = u(rng);
        }
    }
    for (Variable v : kAllVariables) {
        DenseMatrix f(n, g);
        const double k = 1.0 + static_cast<double>(v);
        for (std::size_t t = 0; t < n; ++t) {
            const double s = area_weighted_mean(d.so2.row(t), grid), b = area_weighted_mean(d.bc.row(t), grid);
            for (std::size_t c = 0; c < g; ++c)
                f(t, c) = k * (patterns[0][c] * d.co2[t] + patterns[1][c] * d.ch4[t] + patterns[2][c] * s +
                               patterns[3][c] * b + patterns[4][c]);
        }
        d.set_output(v, f);
    }
    return d;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("default windows") {
    const auto w = default_windows();
    REQUIRE(w.size() == 6);
    CHECK(w[0] == LeadTimeWindow{"2050", 2050, 2050});
    CHECK(w[1] == LeadTimeWindow{"2100", 2100, 2100});
    CHECK(w[2] == LeadTimeWindow{"2045-2055", 2045, 2055});
    CHECK(w[3] == LeadTimeWindow{"2090-2100", 2090, 2100});
    CHECK(w[4] == LeadTimeWindow{"2050-2100", 2050, 2100});
    CHECK(w[5].label == "20Y average");
    CHECK(w[5].year_end - w[5].year_start + 1 == 20);
    CHECK(w[5].year_end == 2100);
}

TEST_CASE("window parsing") {
    CHECK(parse_window("2050") == LeadTimeWindow{"2050", 2050, 2050});
    CHECK(parse_window("2045-2055") == LeadTimeWindow{"2045-2055", 2045, 2055});
    CHECK(parse_window("late=2081-2100") == LeadTimeWindow{"late", 2081, 2100});
    CHECK_ERROR_CODE(parse_window("2100-2050"), ErrorCode::InvalidArgument);
    CHECK_ERROR_CODE(parse_window("soon"), ErrorCode::InvalidArgument);
    CHECK_ERROR_CODE(parse_window(""), ErrorCode::InvalidArgument);
}

TEST_CASE("rmse examples") {
    std::mt19937_64 rng(201);
    const Grid grid = Grid::regular(3, 4);
    const auto years = year_range(2040, 2100);
    const DenseMatrix truth_f = kremu::testing::random_matrix(rng, years.size(), grid.cells());
    DenseMatrix offset = truth_f;
    for (double& v : offset.span()) v += 0.5;
    const auto truth = field_dataset(grid, years, Variable::Tas, truth_f);
    const auto same = field_dataset(grid, years, Variable::Tas, truth_f);
    const auto shifted = field_dataset(grid, years, Variable::Tas, offset);
    for (const auto& w : default_windows()) {
        for (bool weighted : {true, false}) {
            CHECK(rmse_window(same, truth, Variable::Tas, w, weighted) == 0.0);
            CHECK(rmse_window(shifted, truth, Variable::Tas, w, weighted) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }

    Grid lats{2, 1, {0.0, 60.0}};
    const auto t2 = field_dataset(lats, {2050}, Variable::Pr, DenseMatrix{{0.0, 0.0}});
    const auto p2 = field_dataset(lats, {2050}, Variable::Pr, DenseMatrix{{0.0, 1.0}});
    const LeadTimeWindow w{"2050", 2050, 2050};
    CHECK(rmse_window(p2, t2, Variable::Pr, w) == doctest::Approx(0.57735).epsilon(1e-5));
    CHECK(rmse_window(p2, t2, Variable::Pr, w) == doctest::Approx(std::sqrt(0.5 / 1.5)).epsilon(1e-14));
    CHECK(rmse_window(p2, t2, Variable::Pr, w, false) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("averaging happens before the spatial RMSE") {
    const Grid grid{1, 1, {0.0}};
    const auto truth = field_dataset(grid, {2000, 2001}, Variable::Tas, DenseMatrix{{0.0}, {0.0}});
    const auto pred = field_dataset(grid, {2000, 2001}, Variable::Tas, DenseMatrix{{1.0}, {-1.0}});
    CHECK(rmse_window(pred, truth, Variable::Tas, {"w", 2000, 2001}) == 0.0);
    CHECK(rmse_window(pred, truth, Variable::Tas, {"a", 2000, 2000}) == 1.0);
}

TEST_CASE("single-year window equals per-year RMSE") {
    std::mt19937_64 rng(203);
    const Grid grid = Grid::regular(4, 6);
    const auto years = year_range(2090, 2100);
    const DenseMatrix a = kremu::testing::random_matrix(rng, years.size(), grid.cells());
    const DenseMatrix b = kremu::testing::random_matrix(rng, years.size(), grid.cells());
    const auto pa = field_dataset(grid, years, Variable::Tas, a);
    const auto tb = field_dataset(grid, years, Variable::Tas, b);
    for (std::size_t t = 0; t < years.size(); ++t) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < grid.n_lat; ++i) {
            const double w = std::cos(grid.lat_degrees[i] * M_PI / 180.0);
            for (std::size_t j = 0; j < grid.n_lon; ++j) {
                const std::size_t c = i * grid.n_lon + j;
                num += w * (a(t, c) - b(t, c)) * (a(t, c) - b(t, c));
                den += w;
            }
        }
        const LeadTimeWindow w{"y", years[t], years[t]};
        CHECK(rmse_window(pa, tb, Variable::Tas, w) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-13));
    }
}

TEST_CASE("invariant under relabeling grid cells") {
    std::mt19937_64 rng(207);
    const auto years = year_range(2045, 2055);
    // Single-longitude grid: permuting latitudes permutes cells together with their weights.
    const Grid grid{5, 1, {-60.0, -10.0, 5.0, 30.0, 75.0}};
    const DenseMatrix a = kremu::testing::random_matrix(rng, years.size(), 5);
    const DenseMatrix b = kremu::testing::random_matrix(rng, years.size(), 5);
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    Grid pgrid{5, 1, {}};
    DenseMatrix pa(years.size(), 5), pb(years.size(), 5);
    for (std::size_t k = 0; k < 5; ++k) {
        pgrid.lat_degrees.push_back(grid.lat_degrees[perm[k]]);
        for (std::size_t t = 0; t < years.size(); ++t) {
            pa(t, k) = a(t, perm[k]);
            pb(t, k) = b(t, perm[k]);
        }
    }
    const LeadTimeWindow w{"2045-2055", 2045, 2055};
    const double ref = rmse_window(field_dataset(grid, years, Variable::Dtr, a),
                                   field_dataset(grid, years, Variable::Dtr, b), Variable::Dtr, w);
    const double got = rmse_window(field_dataset(pgrid, years, Variable::Dtr, pa),
                                   field_dataset(pgrid, years, Variable::Dtr, pb), Variable::Dtr, w);
    CHECK(got == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("rmse errors") {
    const Grid grid = Grid::regular(2, 2);
    const auto years = year_range(2050, 2060);
    const DenseMatrix f(years.size(), 4);
    const auto t = field_dataset(grid, years, Variable::Tas, f);
    const LeadTimeWindow w{"2050", 2050, 2050};
    CHECK_ERROR_CODE(rmse_window(t, t, Variable::Pr, w), ErrorCode::MissingVariable);
    CHECK_ERROR_CODE(rmse_window(t, t, Variable::Tas, {"2100", 2100, 2100}), ErrorCode::WindowNotCovered);
    const auto shorter = field_dataset(grid, year_range(2052, 2060), Variable::Tas, DenseMatrix(9, 4));
    CHECK_ERROR_CODE(rmse_window(shorter, t, Variable::Tas, {"x", 2050, 2055}), ErrorCode::WindowNotCovered);
    const auto other = field_dataset(Grid::regular(4, 1), years, Variable::Tas, f);
    CHECK_ERROR_CODE(rmse_window(other, t, Variable::Tas, w), ErrorCode::GridMismatch);
}

TEST_CASE("report table and CSV") {
    const Grid grid = Grid::regular(2, 2);
    const auto years = year_range(2040, 2100);
    DenseMatrix off(years.size(), 4, 0.25);
    const auto truth = field_dataset(grid, years, Variable::Tas, DenseMatrix(years.size(), 4));
    std::vector<ScenarioDataset> preds{field_dataset(grid, years, Variable::Tas, off),
                                       field_dataset(grid, years, Variable::Tas, DenseMatrix(years.size(), 4))};
    const std::vector<std::string> labels{"A", "B"};
    const std::vector<Variable> vars{Variable::Tas};
    const auto windows = default_windows();
    const EvalReport r = evaluate_predictions(preds, labels, truth, vars, windows);
    for (std::size_t w = 0; w < 6; ++w) {
        CHECK(r.at(0, 0, w) == doctest::Approx(0.25));
        CHECK(r.at(0, 1, w) == 0.0);
    }
    const std::string csv = r.to_csv();
    CHECK(csv.rfind("variable,model,2050,2100,2045-2055,2090-2100,2050-2100,20Y average\n", 0) == 0);
    CHECK(csv.find("tas,A,0.25,0.25,") != std::string::npos);
    const std::string table = r.to_table();
    CHECK(table.find("[tas]") != std::string::npos);
    CHECK(table.find("0.2500") != std::string::npos);
    CHECK(table.find("2045-2055") < table.find("2090-2100"));
}

TEST_CASE("noiseless linear truth is recovered by GPR with a linear kernel") {
    std::mt19937_64 rng(211);
    const Grid grid = Grid::regular(3, 5);
    std::vector<DenseVector> patterns;
    for (int i = 0; i < 5; ++i) patterns.emplace_back(kremu::testing::random_values(rng, grid.cells()));
    std::vector<ScenarioDataset> train;
    for (int i = 0; i < 3; ++i) train.push_back(linear_scenario(rng, grid, patterns));
    const ScenarioDataset test = linear_scenario(rng, grid, patterns);

    BenchmarkConfig cfg;
    cfg.models = {ModelKind::Gpr};
    cfg.emulator.gpr.select = false;
    cfg.emulator.gpr.kernel = KernelExpr::linear();
    cfg.emulator.gpr.noise_variance = 1e-10;
    const EvalReport r = run_benchmark(train, test, cfg);
    REQUIRE(r.rmse.size() == 4 * 6);
    for (double v : r.rmse) CHECK(v <= 1e-6);
}

TEST_CASE("benchmark shape and determinism") {
    SynthConfig sc;
    sc.seed = 3;
    sc.n_lat = 4;
    sc.n_lon = 6;
    sc.n_years = 30;
    const auto data = synth_scenarios(sc);
    BenchmarkConfig cfg;
    cfg.emulator.gpr.grid = {{1.0, 2.0}, {1.0}, {1e-3, 1e-2}};
    cfg.emulator.krr.grid.lambdas = {1e-3, 1e-1};
    const std::span<const ScenarioDataset> train(data.data(), 3);
    const EvalReport a = run_benchmark(train, data[3], cfg);
    const EvalReport b = run_benchmark(train, data[3], cfg);
    CHECK(a.rmse == b.rmse);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.models == std::vector<std::string>{"GPR", "SVR", "KRR"});
    CHECK(a.variables.size() == 4);
    CHECK(a.windows.size() == 6);
    REQUIRE(a.rmse.size() == 4 * 3 * 6);
    for (double v : a.rmse) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

}  // TEST_SUITE
