#include "kremu/emulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace kremu {

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

double population_sd(const DenseMatrix& m, std::size_t col) {
    double mu = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) mu += m(r, col);
    mu /= static_cast<double>(m.rows());
    double v = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) v += (m(r, col) - mu) * (m(r, col) - mu);
    return std::sqrt(v / static_cast<double>(m.rows()));
}

ComponentModel fit_component(const EmulatorConfig& cfg, const DenseMatrix& x, const DenseVector& y,
                             std::uint64_t seed, std::size_t& unconverged) {
    switch (cfg.model) {
        case ModelKind::Gpr:
            if (cfg.gpr.select) return gpr_grid_select(x, y, cfg.gpr.kernel, cfg.gpr.grid).model;
            return gpr_fit(x, y, cfg.gpr.kernel, cfg.gpr.noise_variance);
        case ModelKind::Svr: {
            SvrOptions opt;
            opt.tol = cfg.svr.tol;
            opt.max_iter = cfg.svr.max_iter;
            SvrFitResult r = svr_fit(x, y, cfg.svr.kernel, cfg.svr.epsilon, cfg.svr.c, opt);
            if (!r.converged) ++unconverged;
            return std::move(r.model);
        }
        case ModelKind::Krr:
            if (cfg.krr.select) return krr_cv_select(x, y, cfg.krr.grid, seed).model;
            return krr_fit(x, y, cfg.krr.kernel, cfg.krr.lambda);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model kind");
}

DenseVector predict_component(const ComponentModel& m, const DenseMatrix& xq) {
    if (const auto* g = std::get_if<GprModel>(&m)) return gpr_predict_mean(*g, xq);
    if (const auto* s = std::get_if<SvrModel>(&m)) return svr_predict(*s, xq);
    return krr_predict(std::get<KrrModel>(m), xq);
}

}  // namespace

std::string_view model_kind_name(ModelKind m) noexcept {
    switch (m) {
        case ModelKind::Gpr: return "GPR";
        case ModelKind::Svr: return "SVR";
        case ModelKind::Krr: return "KRR";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
    std::string lower(name);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == "gpr") return ModelKind::Gpr;
    if (lower == "svr") return ModelKind::Svr;
    if (lower == "krr") return ModelKind::Krr;
    return std::nullopt;
}

std::string config_echo(const EmulatorConfig& c) {
    std::string s;
    auto line = [&s](std::string_view k, const std::string& v) {
        s += k;
        s += '=';
        s += v;
        s += '\n';
    };
    std::string model(model_kind_name(c.model));
    for (auto& ch : model) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    line("model", model);
    line("features", c.features.mode == AerosolMode::GlobalMean ? "global-mean" : "eof");
    line("aerosol_k", std::to_string(c.features.aerosol_k));
    line("eof_k", std::to_string(c.eof_k));
    line("seed", std::to_string(c.seed));
    std::string vars;
    for (std::size_t i = 0; i < c.variables.size(); ++i) {
        if (i) vars += ',';
        vars += variable_name(c.variables[i]);
    }
    line("variables", vars);
    switch (c.model) {
        case ModelKind::Gpr:
            line("kernel", print_kernel(c.gpr.kernel));
            line("gpr_select", c.gpr.select ? "true" : "false");
            if (c.gpr.select) {
                line("gpr_lengthscales", join_doubles(c.gpr.grid.lengthscales));
                line("gpr_variances", join_doubles(c.gpr.grid.variances));
                line("gpr_noises", join_doubles(c.gpr.grid.noise_variances));
            } else {
                line("noise", format_double(c.gpr.noise_variance));
            }
            break;
        case ModelKind::Svr:
            line("kernel", print_kernel(c.svr.kernel));
            line("epsilon", format_double(c.svr.epsilon));
            line("c", format_double(c.svr.c));
            line("tol", format_double(c.svr.tol));
            line("max_iter", std::to_string(c.svr.max_iter));
            break;
        case ModelKind::Krr:
            line("krr_select", c.krr.select ? "true" : "false");
            if (c.krr.select) {
                line("krr_lambdas", join_doubles(c.krr.grid.lambdas));
                line("krr_folds", std::to_string(c.krr.grid.folds));
                std::string ks;
                for (std::size_t i = 0; i < c.krr.grid.kernel_candidates.size(); ++i) {
                    if (i) ks += ';';
                    ks += print_kernel(c.krr.grid.kernel_candidates[i]);
                }
                line("krr_kernels", ks);
            } else {
                line("kernel", print_kernel(c.krr.kernel));
                line("lambda", format_double(c.krr.lambda));
            }
            break;
    }
    return s;
}

Emulator train_emulator(std::span<const ScenarioDataset> training, const EmulatorConfig& config) {
    if (training.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training scenarios");
    if (config.variables.empty()) throw Error(ErrorCode::InvalidArgument, "no output variables requested");
    if (config.eof_k == 0) throw Error(ErrorCode::InvalidArgument, "eof_k must be >= 1");

    Emulator e;
    e.model = config.model;
    e.config_echo = config_echo(config);
    e.features = FeatureModel::fit(training, config.features);

    std::vector<DenseMatrix> xs;
    for (const auto& d : training) xs.push_back(e.features.transform(d).x);
    const DenseMatrix x = vstack(xs);

    for (std::size_t vi = 0; vi < config.variables.size(); ++vi) {
        const Variable v = config.variables[vi];
        std::vector<DenseMatrix> fields;
        for (const auto& d : training) fields.push_back(d.output(v));
        const DenseMatrix y_fields = vstack(fields);

        VariableEmulator ve;
        ve.variable = v;
        const std::size_t k = std::min({config.eof_k, y_fields.rows(), y_fields.cols()});
        ve.basis = eof_fit(y_fields, k);
        const DenseMatrix coeffs = eof_project(ve.basis, y_fields);
        for (std::size_t j = 0; j < k; ++j) {
            const double sd = population_sd(coeffs, j);
            const double scale = sd > 0.0 ? sd : 1.0;
            ve.coef_scale.push_back(scale);
            DenseVector target(coeffs.rows());
            for (std::size_t r = 0; r < coeffs.rows(); ++r) target[r] = coeffs(r, j) / scale;
            const std::uint64_t seed = config.seed + 1000 * static_cast<std::uint64_t>(v) + j;
            ve.models.push_back(fit_component(config, x, target, seed, e.svr_unconverged));
        }
        e.variables.push_back(std::move(ve));
    }
    return e;
}

ScenarioDataset Emulator::predict(const ScenarioDataset& inputs) const {
    const DenseMatrix x = features.transform(inputs).x;
    ScenarioDataset out = inputs;
    out.outputs = {};
    for (const auto& ve : variables) {
        DenseMatrix coeffs(x.rows(), ve.models.size());
        for (std::size_t j = 0; j < ve.models.size(); ++j) {
            const DenseVector c = predict_component(ve.models[j], x);
            for (std::size_t r = 0; r < x.rows(); ++r) coeffs(r, j) = c[r] * ve.coef_scale[j];
        }
        out.set_output(ve.variable, eof_reconstruct(ve.basis, coeffs));
    }
    return out;
}

ScenarioDataset Emulator::predict_variance(const ScenarioDataset& inputs) const {
    if (model != ModelKind::Gpr) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(model_kind_name(model)) + " has no predictive variance");
    }
    const DenseMatrix x = features.transform(inputs).x;
    ScenarioDataset out = inputs;
    out.outputs = {};
    for (const auto& ve : variables) {
        const std::size_t p = ve.basis.gridpoints();
        DenseMatrix var(x.rows(), p);
        for (std::size_t j = 0; j < ve.models.size(); ++j) {
            const Posterior post = gpr_predict(std::get<GprModel>(ve.models[j]), x);
            const double s2 = ve.coef_scale[j] * ve.coef_scale[j];
            const auto comp = ve.basis.components.row(j);
            // Components are treated as independent, so variances add through the basis.
            for (std::size_t r = 0; r < x.rows(); ++r) {
                const double vr = post.variance[r] * s2;
                auto row = var.row(r);
                for (std::size_t g = 0; g < p; ++g) row[g] += vr * comp[g] * comp[g];
            }
        }
        out.set_output(ve.variable, std::move(var));
    }
    return out;
}

}  // namespace kremu
