#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kremu/data.hpp"

namespace kremu {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform and normal draws built directly on mt19937_64 output so that streams do not
// depend on the standard library's distribution implementations.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
    std::optional<double> spare_;
};

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

// Gaussian bump on the sphere, widths in radians.
double bump(double lat, double lon, double lat0, double lon0, double lat_width, double lon_width) {
    const double dlat = lat - lat0;
    const double dlon = wrap_angle(lon - lon0);
    return std::exp(-dlat * dlat / (2.0 * lat_width * lat_width) - dlon * dlon / (2.0 * lon_width * lon_width));
}

void check_positive(std::size_t v, const char* what) {
    if (v == 0) throw Error(ErrorCode::InvalidDimensions, std::string(what) + " must be >= 1");
}

}  // namespace

std::vector<int> synth_years(const SynthConfig& cfg) {
    check_positive(cfg.n_years, "year count");
    int step = cfg.year_step;
    if (step < 0) throw Error(ErrorCode::InvalidDimensions, "year step must be >= 0");
    if (step == 0) {
        step = 1;
        const std::size_t gaps = cfg.n_years - 1;
        if (gaps > 0 && gaps < 50) {
            for (int d : {1, 2, 5, 10, 25, 50}) {
                if (gaps * static_cast<std::size_t>(d) >= 50) {
                    step = d;
                    break;
                }
            }
        }
    }
    std::vector<int> years(cfg.n_years);
    for (std::size_t i = 0; i < cfg.n_years; ++i)
        years[i] = cfg.end_year - static_cast<int>(cfg.n_years - 1 - i) * step;
    return years;
}

DenseVector synth_tas_response(double co2, double ch4, std::span<const double> so2, std::span<const double> bc,
                               const Grid& grid) {
    if (so2.size() != grid.cells() || bc.size() != grid.cells()) {
        throw Error(ErrorCode::DimensionMismatch, "aerosol fields do not match the grid");
    }
    if (!(ch4 > 0.0)) throw Error(ErrorCode::InvalidArgument, "ch4 must be positive");
    DenseVector tas(grid.cells());
    const double log_ch4 = std::log(ch4);
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double lat = grid.lat_degrees[i] * kDeg;
        const double s = std::sin(lat);
        const double polar = 1.0 + 0.8 * s * s;
        const double tropical = 1.0 + 0.3 * std::cos(lat);
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const std::size_t g = i * grid.n_lon + j;
            tas[g] = 0.9 * co2 * polar + 0.6 * log_ch4 * tropical - 2.0 * so2[g] + 1.0 * bc[g];
        }
    }
    return tas;
}

SynthDerived synth_derive_outputs(std::span<const double> tas, const Grid& grid) {
    if (tas.size() != grid.cells()) throw Error(ErrorCode::DimensionMismatch, "tas field does not match the grid");
    SynthDerived out{DenseVector(grid.cells()), DenseVector(grid.cells()), DenseVector(grid.cells())};
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double lat = grid.lat_degrees[i] * kDeg;
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const std::size_t g = i * grid.n_lon + j;
            const double lon = grid.lon_degrees(j) * kDeg;
            const double t = tas[g];
            out.dtr[g] = -0.12 * t + 0.01 * t * t;
            const double pr = 2.0 * t + 0.3 * t * t * (1.0 + std::sin(lat) * std::cos(2.0 * lon));
            out.pr[g] = pr;
            out.pr90[g] = 1.3 * pr + 0.05 * pr * pr;
        }
    }
    return out;
}

std::vector<ScenarioDataset> synth_scenarios(const SynthConfig& cfg) {
    check_positive(cfg.n_scenarios, "scenario count");
    check_positive(cfg.n_lat, "n_lat");
    check_positive(cfg.n_lon, "n_lon");
    if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) {
        throw Error(ErrorCode::InvalidDimensions, "noise fraction must be >= 0");
    }
    const std::vector<int> years = synth_years(cfg);
    const Grid grid = Grid::regular(cfg.n_lat, cfg.n_lon);
    const std::size_t n_years = years.size();
    const std::size_t cells = grid.cells();
    const std::size_t n_sc = cfg.n_scenarios;
    const double sigma = cfg.noise * kSynthSignalAmplitude;

    // Emission intensity levels evenly spread over [0.2, 1]; the last scenario (the default
    // test split) takes the median level so evaluation interpolates between training runs.
    std::vector<double> levels(n_sc);
    for (std::size_t m = 0; m < n_sc; ++m)
        levels[m] = n_sc == 1 ? 0.6 : 0.2 + 0.8 * static_cast<double>(m) / static_cast<double>(n_sc - 1);
    std::vector<double> intensity(n_sc);
    const std::size_t median = (n_sc - 1) / 2;
    intensity[n_sc - 1] = levels[median];
    for (std::size_t s = 0, m = 0; s + 1 < n_sc; ++s, ++m) {
        if (m == median) ++m;
        intensity[s] = levels[m];
    }

    std::vector<double> so2_shape(cells), bc_shape(cells), sin_lat(cells), cos_lat_cos(cells), cos_lat_sin(cells);
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double lat = grid.lat_degrees[i] * kDeg;
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const std::size_t g = i * grid.n_lon + j;
            const double lon = grid.lon_degrees(j) * kDeg;
            so2_shape[g] = bump(lat, lon, 35.0 * kDeg, 110.0 * kDeg, 0.35, 0.6);
            bc_shape[g] = bump(lat, lon, 20.0 * kDeg, 80.0 * kDeg, 0.3, 0.5);
            sin_lat[g] = std::sin(lat);
            cos_lat_cos[g] = std::cos(lat) * std::cos(lon);
            cos_lat_sin[g] = std::cos(lat) * std::sin(lon);
        }
    }

    const double span = n_years > 1 ? static_cast<double>(years.back() - years.front()) : 1.0;
    std::vector<ScenarioDataset> out;
    out.reserve(n_sc);
    for (std::size_t s = 0; s < n_sc; ++s) {
        Stream rng(splitmix64(cfg.seed ^ splitmix64(s + 1)));
        const double u = intensity[s] + 0.02 * (rng.uniform() - 0.5);

        ScenarioDataset d;
        d.name = "scenario_" + std::string(s < 10 ? "00" : s < 100 ? "0" : "") + std::to_string(s);
        d.years = years;
        d.grid = grid;
        d.co2.resize(n_years);
        d.ch4.resize(n_years);
        std::vector<double> so2(n_years * cells), bc(n_years * cells), tas(n_years * cells);
        std::vector<double> dtr(n_years * cells), pr(n_years * cells), pr90(n_years * cells);

        for (std::size_t t = 0; t < n_years; ++t) {
            const double tau = n_years > 1 ? static_cast<double>(years[t] - years.front()) / span : 1.0;
            d.co2[t] = 0.5 + 2.0 * u * tau * (1.0 + 0.5 * tau);
            d.ch4[t] = 1.0 + 1.5 * u * (1.0 - std::exp(-3.0 * tau));
            const double a_so2 = (0.5 + (1.0 - u)) * std::exp(-tau / (0.3 + 0.4 * u));
            const double a_bc = (0.3 + 0.6 * u) * std::exp(-tau / (0.5 + 0.3 * u));
            const std::span<double> so2_t(so2.data() + t * cells, cells);
            const std::span<double> bc_t(bc.data() + t * cells, cells);
            for (std::size_t g = 0; g < cells; ++g) {
                so2_t[g] = a_so2 * so2_shape[g];
                bc_t[g] = a_bc * bc_shape[g];
            }
            DenseVector field = synth_tas_response(d.co2[t], d.ch4[t], so2_t, bc_t, grid);
            const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
            if (sigma > 0.0) {
                for (std::size_t g = 0; g < cells; ++g) {
                    field[g] += sigma * (z0 + z1 * sin_lat[g] + z2 * cos_lat_cos[g] + z3 * cos_lat_sin[g]) /
                                std::numbers::sqrt2;
                }
            }
            const SynthDerived derived = synth_derive_outputs(field.span(), grid);
            std::copy_n(field.span().begin(), cells, tas.begin() + static_cast<std::ptrdiff_t>(t * cells));
            std::copy_n(derived.dtr.span().begin(), cells, dtr.begin() + static_cast<std::ptrdiff_t>(t * cells));
            std::copy_n(derived.pr.span().begin(), cells, pr.begin() + static_cast<std::ptrdiff_t>(t * cells));
            std::copy_n(derived.pr90.span().begin(), cells, pr90.begin() + static_cast<std::ptrdiff_t>(t * cells));
        }
        d.so2 = DenseMatrix(n_years, cells, std::move(so2));
        d.bc = DenseMatrix(n_years, cells, std::move(bc));
        d.set_output(Variable::Tas, DenseMatrix(n_years, cells, std::move(tas)));
        d.set_output(Variable::Dtr, DenseMatrix(n_years, cells, std::move(dtr)));
        d.set_output(Variable::Pr, DenseMatrix(n_years, cells, std::move(pr)));
        d.set_output(Variable::Pr90, DenseMatrix(n_years, cells, std::move(pr90)));
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace kremu
