#include <cmath>
#include <numbers>

#include "kremu/data.hpp"

namespace kremu {

namespace {

void check_grid(const Grid& expected, const Grid& got, const std::string& name) {
    if (!(expected == got)) throw Error(ErrorCode::GridMismatch, "dataset '" + name + "' uses a different grid");
}

// Unstandardized feature rows for one dataset.
DenseMatrix raw_features(const FeatureModel& fm, const ScenarioDataset& d) {
    const std::size_t n = d.n_years();
    DenseMatrix x(n, fm.width());
    std::optional<DenseMatrix> so2_coef, bc_coef;
    if (fm.spec.mode == AerosolMode::Eof) {
        so2_coef = eof_project(*fm.so2_basis, d.so2);
        bc_coef = eof_project(*fm.bc_basis, d.bc);
    }
    for (std::size_t t = 0; t < n; ++t) {
        auto row = x.row(t);
        row[0] = d.co2[t];
        row[1] = d.ch4[t];
        if (fm.spec.mode == AerosolMode::GlobalMean) {
            row[2] = area_weighted_mean(d.so2.row(t), d.grid);
            row[3] = area_weighted_mean(d.bc.row(t), d.grid);
        } else {
            const std::size_t k = fm.spec.aerosol_k;
            for (std::size_t i = 0; i < k; ++i) {
                row[2 + i] = (*so2_coef)(t, i);
                row[2 + k + i] = (*bc_coef)(t, i);
            }
        }
    }
    return x;
}

}  // namespace

double area_weighted_mean(std::span<const double> field, const Grid& grid) {
    if (field.size() != grid.cells()) {
        throw Error(ErrorCode::DimensionMismatch, "field length " + std::to_string(field.size()) + " for grid of " +
                                                      std::to_string(grid.cells()) + " cells");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double w = std::cos(grid.lat_degrees[i] * std::numbers::pi / 180.0);
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            num += w * field[i * grid.n_lon + j];
            den += w;
        }
    }
    return num / den;
}

FeatureModel FeatureModel::fit(std::span<const ScenarioDataset> training, const FeatureSpec& spec) {
    std::size_t total_years = 0;
    for (const auto& d : training) total_years += d.n_years();
    if (training.empty() || total_years == 0) throw Error(ErrorCode::EmptyDataset, "no training years for features");

    FeatureModel fm;
    fm.spec = spec;
    fm.grid = training.front().grid;
    for (const auto& d : training) check_grid(fm.grid, d.grid, d.name);

    fm.names = {"co2", "ch4"};
    if (spec.mode == AerosolMode::GlobalMean) {
        fm.names.push_back("so2_mean");
        fm.names.push_back("bc_mean");
    } else {
        std::vector<DenseMatrix> so2, bc;
        for (const auto& d : training) {
            so2.push_back(d.so2);
            bc.push_back(d.bc);
        }
        fm.so2_basis = eof_fit(vstack(so2), spec.aerosol_k);
        fm.bc_basis = eof_fit(vstack(bc), spec.aerosol_k);
        for (std::size_t i = 0; i < spec.aerosol_k; ++i) fm.names.push_back("so2_eof" + std::to_string(i + 1));
        for (std::size_t i = 0; i < spec.aerosol_k; ++i) fm.names.push_back("bc_eof" + std::to_string(i + 1));
    }

    const std::size_t width = fm.names.size();
    std::vector<double> sum(width, 0.0), sq(width, 0.0);
    std::vector<DenseMatrix> raws;
    fm.offset.assign(width, 0.0);
    fm.scale.assign(width, 1.0);
    for (const auto& d : training) raws.push_back(raw_features(fm, d));
    const DenseMatrix all = vstack(raws);
    const double n = static_cast<double>(all.rows());
    for (std::size_t c = 0; c < width; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < all.rows(); ++r) m += all(r, c);
        m /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < all.rows(); ++r) var += (all(r, c) - m) * (all(r, c) - m);
        var /= n;
        const double sd = std::sqrt(var);
        fm.offset[c] = m;
        // Treat spreads at rounding level of the mean as constant columns.
        fm.scale[c] = sd > 1e-12 * std::max(std::abs(m), 1e-300) ? sd : 0.0;
    }
    return fm;
}

FeatureTable FeatureModel::transform(const ScenarioDataset& d) const {
    check_grid(grid, d.grid, d.name);
    FeatureTable t{raw_features(*this, d), names};
    for (std::size_t r = 0; r < t.x.rows(); ++r) {
        auto row = t.x.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = scale[c] == 0.0 ? 0.0 : (row[c] - offset[c]) / scale[c];
    }
    return t;
}

FeatureTable build_features(const ScenarioDataset& d, const FeatureSpec& spec) {
    if (d.n_years() == 0) throw Error(ErrorCode::EmptyDataset, "dataset '" + d.name + "' has no years");
    return FeatureModel::fit(std::span<const ScenarioDataset>(&d, 1), spec).transform(d);
}

std::string feature_table_csv(const FeatureTable& t) {
    std::string out;
    for (std::size_t c = 0; c < t.feature_names.size(); ++c) {
        if (c) out += ',';
        out += t.feature_names[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < t.x.rows(); ++r) {
        for (std::size_t c = 0; c < t.x.cols(); ++c) {
            if (c) out += ',';
            out += format_double(t.x(r, c));
        }
        out += '\n';
    }
    return out;
}

}  // namespace kremu
