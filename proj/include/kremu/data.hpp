#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kremu/numerics.hpp"
#include "kremu/reduce.hpp"

namespace kremu {

/// Output variables in CBX mask-bit order.
enum class Variable : std::uint8_t { Tas = 0, Dtr = 1, Pr = 2, Pr90 = 3 };

inline constexpr std::array<Variable, 4> kAllVariables = {Variable::Tas, Variable::Dtr, Variable::Pr, Variable::Pr90};

std::string_view variable_name(Variable v) noexcept;
std::optional<Variable> parse_variable(std::string_view name) noexcept;

struct Grid {
    std::size_t n_lat = 0;
    std::size_t n_lon = 0;
    std::vector<double> lat_degrees;  // strictly increasing, south to north

    /// Cell-centred latitudes, -90 + (i + 0.5) * 180 / n_lat.
    static Grid regular(std::size_t n_lat, std::size_t n_lon);

    [[nodiscard]] std::size_t cells() const noexcept { return n_lat * n_lon; }
    /// j * 360 / n_lon; longitudes are implicit in CBX.
    [[nodiscard]] double lon_degrees(std::size_t j) const noexcept;

    bool operator==(const Grid&) const = default;
};

/// One scenario: per-year forcings and (optionally) per-year output fields.
/// Fields are stored year-major, one row per year, each row lat-major over the grid.
struct ScenarioDataset {
    std::string name;
    std::vector<int> years;
    Grid grid;
    std::vector<double> co2;  // cumulative emissions
    std::vector<double> ch4;
    DenseMatrix so2;          // n_years x cells
    DenseMatrix bc;
    std::array<std::optional<DenseMatrix>, 4> outputs;

    [[nodiscard]] std::size_t n_years() const noexcept { return years.size(); }
    [[nodiscard]] bool has(Variable v) const noexcept { return outputs[static_cast<std::size_t>(v)].has_value(); }
    /// Throws MissingVariable when absent.
    [[nodiscard]] const DenseMatrix& output(Variable v) const;
    void set_output(Variable v, DenseMatrix fields);
    [[nodiscard]] std::uint32_t output_mask() const noexcept;
    [[nodiscard]] std::optional<std::size_t> year_index(int year) const noexcept;

    /// Checks field shapes, year ordering and latitude range; throws InvalidDimensions.
    void validate() const;

    bool operator==(const ScenarioDataset&) const = default;
};

// ---- CBX binary format -------------------------------------------------------------------
//
//   "CBX1"
//   u32 n_years, u32 n_lat, u32 n_lon, u32 output_mask   (bit i: tas, dtr, pr, pr90)
//   f64 lat_degrees[n_lat]
//   i32 years[n_years]
//   f64 co2[n_years], f64 ch4[n_years]
//   f64 so2[n_years * n_lat * n_lon], f64 bc[...]
//   f64 <variable>[n_years * n_lat * n_lon] for each set mask bit, in bit order
//
// Everything little-endian; fields year-major, then lat-major. The name is not stored;
// read_cbx takes it from the file stem.

std::vector<std::uint8_t> encode_cbx(const ScenarioDataset& d);
ScenarioDataset decode_cbx(std::span<const std::uint8_t> bytes, std::string name = {});
void write_cbx(const ScenarioDataset& d, const std::filesystem::path& path);
ScenarioDataset read_cbx(const std::filesystem::path& path);

// ---- features ----------------------------------------------------------------------------

enum class AerosolMode { GlobalMean, Eof };

struct FeatureSpec {
    AerosolMode mode = AerosolMode::GlobalMean;
    std::size_t aerosol_k = 2;  // EOF coefficients kept per aerosol field in Eof mode
};

struct FeatureTable {
    DenseMatrix x;  // one row per year
    std::vector<std::string> feature_names;
};

/// cos(latitude)-weighted mean of one field.
double area_weighted_mean(std::span<const double> field, const Grid& grid);

/// Featurization fit on training scenarios and frozen for later datasets:
/// [co2, ch4] followed by aerosol summaries, each column standardized with training statistics.
struct FeatureModel {
    FeatureSpec spec;
    Grid grid;
    std::optional<EofBasis> so2_basis;
    std::optional<EofBasis> bc_basis;
    std::vector<double> offset;
    std::vector<double> scale;  // 0 marks a constant training column, emitted as 0
    std::vector<std::string> names;

    static FeatureModel fit(std::span<const ScenarioDataset> training, const FeatureSpec& spec);
    [[nodiscard]] FeatureTable transform(const ScenarioDataset& d) const;
    [[nodiscard]] std::size_t width() const noexcept { return names.size(); }
};

/// Fit-and-transform on a single dataset.
FeatureTable build_features(const ScenarioDataset& d, const FeatureSpec& spec = {});

/// Header row of feature names, then one row per year; '.' decimals, '\n' line endings.
std::string feature_table_csv(const FeatureTable& t);

// ---- synthetic scenarios -----------------------------------------------------------------

struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_scenarios = 4;
    std::size_t n_years = 50;
    std::size_t n_lat = 8;
    std::size_t n_lon = 16;
    double noise = 0.1;   // noise amplitude as a fraction of kSynthSignalAmplitude
    int end_year = 2100;
    int year_step = 0;    // 0 picks the smallest step in {1,2,5,10,25,50} spanning >= 50 years
};

/// Reference amplitude (K) that SynthConfig::noise scales.
inline constexpr double kSynthSignalAmplitude = 3.0;

std::vector<int> synth_years(const SynthConfig& cfg);

/// Noise-free tas response to one year of forcings:
///   0.9 co2 (1 + 0.8 sin^2 lat) + 0.6 ln(ch4) (1 + 0.3 cos lat) - 2.0 so2 + 1.0 bc
DenseVector synth_tas_response(double co2, double ch4, std::span<const double> so2, std::span<const double> bc,
                               const Grid& grid);

struct SynthDerived {
    DenseVector dtr;
    DenseVector pr;
    DenseVector pr90;
};

/// dtr = -0.12 T + 0.01 T^2;  pr = 2 T + 0.3 T^2 (1 + sin(lat) cos(2 lon));  pr90 = 1.3 pr + 0.05 pr^2
SynthDerived synth_derive_outputs(std::span<const double> tas, const Grid& grid);

std::vector<ScenarioDataset> synth_scenarios(const SynthConfig& cfg);

}  // namespace kremu
