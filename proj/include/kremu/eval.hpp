#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kremu/data.hpp"
#include "kremu/emulator.hpp"

namespace kremu {

struct LeadTimeWindow {
    std::string label;
    int year_start = 0;
    int year_end = 0;  // inclusive

    bool operator==(const LeadTimeWindow&) const = default;
};

/// 2050, 2100, 2045-2055, 2090-2100, 2050-2100, and "20Y average" = 2081-2100.
std::vector<LeadTimeWindow> default_windows();

/// "2050", "2045-2055" or "label=2081-2100". Throws InvalidArgument.
LeadTimeWindow parse_window(std::string_view text);

/// Average both datasets' fields over the window years, then take the (optionally
/// cos-latitude weighted) spatial RMSE of the difference.
/// The window is covered when truth has at least one year inside it and pred has all of them.
double rmse_window(const ScenarioDataset& pred, const ScenarioDataset& truth, Variable variable,
                   const LeadTimeWindow& window, bool area_weighted = true);

/// RMSE per (variable, model, window).
struct EvalReport {
    std::string dataset;
    bool area_weighted = true;
    std::vector<Variable> variables;
    std::vector<std::string> models;
    std::vector<LeadTimeWindow> windows;
    std::vector<double> rmse;  // variable-major, then model, then window

    [[nodiscard]] double at(std::size_t variable, std::size_t model, std::size_t window) const;
    /// One block per variable, models as rows and windows as columns.
    [[nodiscard]] std::string to_table() const;
    /// Header "variable,model,<window labels>", one line per (variable, model).
    [[nodiscard]] std::string to_csv() const;
};

/// Scores already-predicted datasets, one per model label.
EvalReport evaluate_predictions(std::span<const ScenarioDataset> predictions, std::span<const std::string> labels,
                                const ScenarioDataset& truth, std::span<const Variable> variables,
                                std::span<const LeadTimeWindow> windows, bool area_weighted = true);

struct BenchmarkConfig {
    std::vector<ModelKind> models{ModelKind::Gpr, ModelKind::Svr, ModelKind::Krr};
    EmulatorConfig emulator{};  // `model` is overridden per entry of `models`
    std::vector<LeadTimeWindow> windows = default_windows();
    bool area_weighted = true;
};

/// Trains every configured model on `train`, predicts `test` and scores all windows.
EvalReport run_benchmark(std::span<const ScenarioDataset> train, const ScenarioDataset& test,
                         const BenchmarkConfig& config);

}  // namespace kremu
