#include <cmath>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "kremu/data.hpp"

namespace kremu {

std::string_view variable_name(Variable v) noexcept {
    switch (v) {
        case Variable::Tas: return "tas";
        case Variable::Dtr: return "dtr";
        case Variable::Pr: return "pr";
        case Variable::Pr90: return "pr90";
    }
    return "?";
}

std::optional<Variable> parse_variable(std::string_view name) noexcept {
    for (Variable v : kAllVariables)
        if (variable_name(v) == name) return v;
    return std::nullopt;
}

Grid Grid::regular(std::size_t n_lat, std::size_t n_lon) {
    Grid g{n_lat, n_lon, {}};
    g.lat_degrees.resize(n_lat);
    for (std::size_t i = 0; i < n_lat; ++i)
        g.lat_degrees[i] = -90.0 + (static_cast<double>(i) + 0.5) * 180.0 / static_cast<double>(n_lat);
    return g;
}

double Grid::lon_degrees(std::size_t j) const noexcept {
    return static_cast<double>(j) * 360.0 / static_cast<double>(n_lon);
}

const DenseMatrix& ScenarioDataset::output(Variable v) const {
    const auto& slot = outputs[static_cast<std::size_t>(v)];
    if (!slot) {
        throw Error(ErrorCode::MissingVariable,
                    std::string(variable_name(v)) + " is not present in dataset '" + name + "'");
    }
    return *slot;
}

void ScenarioDataset::set_output(Variable v, DenseMatrix fields) {
    if (fields.rows() != n_years() || fields.cols() != grid.cells()) {
        throw Error(ErrorCode::InvalidDimensions, std::string(variable_name(v)) + " fields do not match years x cells");
    }
    outputs[static_cast<std::size_t>(v)] = std::move(fields);
}

std::uint32_t ScenarioDataset::output_mask() const noexcept {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        if (outputs[i]) mask |= 1u << i;
    return mask;
}

std::optional<std::size_t> ScenarioDataset::year_index(int year) const noexcept {
    for (std::size_t i = 0; i < years.size(); ++i)
        if (years[i] == year) return i;
    return std::nullopt;
}

void ScenarioDataset::validate() const {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::InvalidDimensions, "dataset '" + name + "': " + what);
    };
    if (grid.n_lat == 0 || grid.n_lon == 0) fail("empty grid");
    if (grid.lat_degrees.size() != grid.n_lat) fail("lat_degrees length differs from n_lat");
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double lat = grid.lat_degrees[i];
        if (!(lat >= -90.0 && lat <= 90.0)) fail("latitude outside [-90, 90]");
        if (i > 0 && !(lat > grid.lat_degrees[i - 1])) fail("latitudes not strictly increasing");
    }
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] <= years[i - 1]) fail("years not strictly increasing");
    const std::size_t n = years.size();
    if (co2.size() != n || ch4.size() != n) fail("scalar forcing length differs from year count");
    auto check_fields = [&](const DenseMatrix& m, const char* what) {
        if (m.rows() != n || m.cols() != grid.cells()) fail(std::string(what) + " fields do not match years x cells");
    };
    check_fields(so2, "so2");
    check_fields(bc, "bc");
    for (Variable v : kAllVariables)
        if (has(v)) check_fields(output(v), variable_name(v).data());
}

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for '" + path + "'");
    return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace detail

}  // namespace kremu
