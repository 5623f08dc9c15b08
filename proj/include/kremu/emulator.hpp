#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kremu/data.hpp"
#include "kremu/gpr.hpp"
#include "kremu/kernels.hpp"
#include "kremu/krr.hpp"
#include "kremu/reduce.hpp"
#include "kremu/svr.hpp"

namespace kremu {

enum class ModelKind { Gpr, Svr, Krr };

std::string_view model_kind_name(ModelKind m) noexcept;  // "GPR", "SVR", "KRR"
std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;  // case-insensitive

struct GprSettings {
    KernelExpr kernel = KernelExpr::matern32();
    bool select = true;  // maximize LML over `grid`; otherwise use kernel and noise_variance as given
    GprGrid grid{{0.5, 1.0, 2.0, 5.0}, {0.5, 1.0, 2.0}, {1e-4, 1e-3, 1e-2, 1e-1}};
    double noise_variance = 1e-2;
};

struct SvrSettings {
    KernelExpr kernel = KernelExpr::matern32(2.0);
    double epsilon = 0.05;
    double c = 10.0;
    double tol = 1e-3;
    std::size_t max_iter = 100000;
};

struct KrrSettings {
    bool select = true;  // k-fold CV over `grid`
    CvGrid grid = CvGrid::defaults();
    KernelExpr kernel = KernelExpr::matern32();
    double lambda = 1e-2;
};

struct EmulatorConfig {
    ModelKind model = ModelKind::Gpr;
    FeatureSpec features{};
    std::size_t eof_k = 5;  // clamped to min(training years, gridpoints)
    std::uint64_t seed = 0;
    std::vector<Variable> variables{kAllVariables.begin(), kAllVariables.end()};
    GprSettings gpr{};
    SvrSettings svr{};
    KrrSettings krr{};
};

using ComponentModel = std::variant<GprModel, SvrModel, KrrModel>;

/// One output variable: EOF basis plus one regressor per retained component.
/// Regressors are trained on coefficients divided by `coef_scale`.
struct VariableEmulator {
    Variable variable = Variable::Tas;
    EofBasis basis;
    std::vector<double> coef_scale;
    std::vector<ComponentModel> models;
};

struct Emulator {
    ModelKind model = ModelKind::Gpr;
    FeatureModel features;
    std::vector<VariableEmulator> variables;
    std::size_t svr_unconverged = 0;  // components whose SMO run hit max_iter
    std::string config_echo;          // key=value text of the training configuration

    /// Copy of `inputs` with the emulated output fields attached (existing outputs dropped).
    [[nodiscard]] ScenarioDataset predict(const ScenarioDataset& inputs) const;
    /// Per-gridpoint predictive variance in field units; GPR only (InvalidArgument otherwise).
    [[nodiscard]] ScenarioDataset predict_variance(const ScenarioDataset& inputs) const;
};

/// Features on pooled training years, EOF per variable, then one regressor per component.
Emulator train_emulator(std::span<const ScenarioDataset> training, const EmulatorConfig& config);

/// key=value lines describing `config`, one per setting.
std::string config_echo(const EmulatorConfig& config);

// ---- model bundle ------------------------------------------------------------------------
//
//   "KRB1", then sections of  char tag[4], u64 payload_length, payload
//   CONF  model kind and config echo text
//   FEAT  feature model
//   VARB  one per variable: basis, scales, component regressors
//   END_  empty, terminates the bundle
//
// Doubles are stored as raw little-endian bits, so reloads reproduce predictions exactly.

std::vector<std::uint8_t> encode_bundle(const Emulator& e);
Emulator decode_bundle(std::span<const std::uint8_t> bytes);
void write_bundle(const Emulator& e, const std::filesystem::path& path);
Emulator read_bundle(const std::filesystem::path& path);

}  // namespace kremu
