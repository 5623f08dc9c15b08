#include "kremu/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numbers>

namespace kremu {

namespace {

int parse_year(std::string_view s, std::string_view whole) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bad year in window '" + std::string(whole) + "'");
    }
    return v;
}

std::vector<double> window_mean(const ScenarioDataset& d, const DenseMatrix& fields, std::span<const int> years) {
    std::vector<double> m(fields.cols(), 0.0);
    for (int y : years) {
        const auto row = fields.row(*d.year_index(y));
        for (std::size_t g = 0; g < m.size(); ++g) m[g] += row[g];
    }
    for (auto& v : m) v /= static_cast<double>(years.size());
    return m;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
    if (s.size() >= width) return s;
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::vector<LeadTimeWindow> default_windows() {
    return {{"2050", 2050, 2050},           {"2100", 2100, 2100},           {"2045-2055", 2045, 2055},
            {"2090-2100", 2090, 2100},      {"2050-2100", 2050, 2100},      {"20Y average", 2081, 2100}};
}

LeadTimeWindow parse_window(std::string_view text) {
    std::string label;
    std::string_view range = text;
    if (const auto eq = text.find('='); eq != std::string_view::npos) {
        label = std::string(text.substr(0, eq));
        range = text.substr(eq + 1);
        if (label.empty()) throw Error(ErrorCode::InvalidArgument, "empty label in window '" + std::string(text) + "'");
    }
    LeadTimeWindow w;
    if (const auto dash = range.find('-'); dash != std::string_view::npos) {
        w.year_start = parse_year(range.substr(0, dash), text);
        w.year_end = parse_year(range.substr(dash + 1), text);
    } else {
        w.year_start = w.year_end = parse_year(range, text);
    }
    if (w.year_start > w.year_end) throw Error(ErrorCode::InvalidArgument, "window '" + std::string(text) + "' ends before it starts");
    w.label = label.empty() ? std::string(range) : label;
    return w;
}

double rmse_window(const ScenarioDataset& pred, const ScenarioDataset& truth, Variable variable,
                   const LeadTimeWindow& window, bool area_weighted) {
    if (!(pred.grid == truth.grid)) throw Error(ErrorCode::GridMismatch, "prediction and truth grids differ");
    const DenseMatrix& p = pred.output(variable);
    const DenseMatrix& t = truth.output(variable);
    std::vector<int> years;
    for (int y : truth.years) {
        if (y < window.year_start || y > window.year_end) continue;
        if (!pred.year_index(y)) {
            throw Error(ErrorCode::WindowNotCovered,
                        "prediction lacks year " + std::to_string(y) + " of window " + window.label);
        }
        years.push_back(y);
    }
    if (years.empty()) {
        throw Error(ErrorCode::WindowNotCovered, "truth '" + truth.name + "' has no years in window " + window.label);
    }
    const std::vector<double> pm = window_mean(pred, p, years);
    const std::vector<double> tm = window_mean(truth, t, years);
    const Grid& g = truth.grid;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.n_lat; ++i) {
        const double w = area_weighted ? std::cos(g.lat_degrees[i] * std::numbers::pi / 180.0) : 1.0;
        for (std::size_t j = 0; j < g.n_lon; ++j) {
            const std::size_t c = i * g.n_lon + j;
            const double e = pm[c] - tm[c];
            num += w * e * e;
            den += w;
        }
    }
    return std::sqrt(num / den);
}

double EvalReport::at(std::size_t variable, std::size_t model, std::size_t window) const {
    return rmse.at((variable * models.size() + model) * windows.size() + window);
}

std::string EvalReport::to_table() const {
    std::size_t name_w = 5;
    for (const auto& m : models) name_w = std::max(name_w, m.size());
    std::vector<std::size_t> col_w;
    for (const auto& w : windows) col_w.push_back(std::max<std::size_t>(w.label.size(), 8));

    std::string out = "RMSE on " + (dataset.empty() ? std::string("test scenario") : dataset) +
                      (area_weighted ? " (area-weighted)" : " (unweighted)") + "\n";
    for (std::size_t v = 0; v < variables.size(); ++v) {
        out += "\n[" + std::string(variable_name(variables[v])) + "]\n";
        out += pad("Model", name_w, false);
        for (std::size_t w = 0; w < windows.size(); ++w) out += "  " + pad(windows[w].label, col_w[w], true);
        out += '\n';
        for (std::size_t m = 0; m < models.size(); ++m) {
            out += pad(models[m], name_w, false);
            for (std::size_t w = 0; w < windows.size(); ++w) out += "  " + pad(fixed(at(v, m, w)), col_w[w], true);
            out += '\n';
        }
    }
    return out;
}

std::string EvalReport::to_csv() const {
    std::string out = "variable,model";
    for (const auto& w : windows) out += "," + w.label;
    out += '\n';
    for (std::size_t v = 0; v < variables.size(); ++v) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            out += std::string(variable_name(variables[v])) + "," + models[m];
            for (std::size_t w = 0; w < windows.size(); ++w) out += "," + format_double(at(v, m, w));
            out += '\n';
        }
    }
    return out;
}

EvalReport evaluate_predictions(std::span<const ScenarioDataset> predictions, std::span<const std::string> labels,
                                const ScenarioDataset& truth, std::span<const Variable> variables,
                                std::span<const LeadTimeWindow> windows, bool area_weighted) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one label is needed per prediction");
    }
    EvalReport r;
    r.dataset = truth.name;
    r.area_weighted = area_weighted;
    r.variables.assign(variables.begin(), variables.end());
    r.models.assign(labels.begin(), labels.end());
    r.windows.assign(windows.begin(), windows.end());
    for (Variable v : variables)
        for (const auto& p : predictions)
            for (const auto& w : windows) r.rmse.push_back(rmse_window(p, truth, v, w, area_weighted));
    return r;
}

EvalReport run_benchmark(std::span<const ScenarioDataset> train, const ScenarioDataset& test,
                         const BenchmarkConfig& config) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "benchmark needs at least one training scenario");
    if (config.models.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least one model");
    std::vector<ScenarioDataset> preds;
    std::vector<std::string> labels;
    for (ModelKind m : config.models) {
        EmulatorConfig ec = config.emulator;
        ec.model = m;
        preds.push_back(train_emulator(train, ec).predict(test));
        labels.emplace_back(model_kind_name(m));
    }
    return evaluate_predictions(preds, labels, test, config.emulator.variables, config.windows,
                                config.area_weighted);
}

}  // namespace kremu
