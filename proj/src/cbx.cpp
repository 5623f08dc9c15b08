#include "binary_io.hpp"
#include "kremu/data.hpp"

namespace kremu {

namespace {

constexpr std::string_view kMagic = "CBX1";

}  // namespace

std::vector<std::uint8_t> encode_cbx(const ScenarioDataset& d) {
    d.validate();
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(static_cast<std::uint32_t>(d.n_years()));
    w.u32(static_cast<std::uint32_t>(d.grid.n_lat));
    w.u32(static_cast<std::uint32_t>(d.grid.n_lon));
    w.u32(d.output_mask());
    w.f64s(d.grid.lat_degrees);
    for (int y : d.years) w.i32(y);
    w.f64s(d.co2);
    w.f64s(d.ch4);
    w.f64s(d.so2.span());
    w.f64s(d.bc.span());
    for (Variable v : kAllVariables)
        if (d.has(v)) w.f64s(d.output(v).span());
    return w.take();
}

ScenarioDataset decode_cbx(std::span<const std::uint8_t> bytes, std::string name) {
    detail::ByteReader r(bytes);
    if (bytes.size() < kMagic.size()) throw Error(ErrorCode::TruncatedFile, "file shorter than the CBX magic");
    if (r.bytes(kMagic.size()) != kMagic) throw Error(ErrorCode::BadMagic, "not a CBX1 file");

    const std::uint64_t n_years = r.u32();
    const std::uint64_t n_lat = r.u32();
    const std::uint64_t n_lon = r.u32();
    const std::uint32_t mask = r.u32();
    if (n_lat == 0 || n_lon == 0) throw Error(ErrorCode::InvalidHeader, "grid dimensions must be nonzero");
    if (mask > 0xF) throw Error(ErrorCode::InvalidHeader, "output mask has unknown bits set");

    const std::uint64_t cells = n_lat * n_lon;
    const std::uint64_t budget = r.remaining() / 8;
    if (cells > budget || (n_years > 0 && cells > budget / n_years)) {
        throw Error(ErrorCode::TruncatedFile, "header dimensions exceed the file size");
    }
    const std::uint64_t field_values = n_years * cells;
    const std::uint64_t n_outputs = static_cast<std::uint64_t>(std::popcount(mask));
    const std::uint64_t expected =
        8 * n_lat + 4 * n_years + 8 * 2 * n_years + 8 * field_values * (2 + n_outputs);
    if (r.remaining() < expected) {
        throw Error(ErrorCode::TruncatedFile, "header promises " + std::to_string(expected) + " payload bytes, found " +
                                                  std::to_string(r.remaining()));
    }
    if (r.remaining() > expected) throw Error(ErrorCode::InvalidHeader, "trailing bytes after CBX payload");

    ScenarioDataset d;
    d.name = std::move(name);
    d.grid.n_lat = static_cast<std::size_t>(n_lat);
    d.grid.n_lon = static_cast<std::size_t>(n_lon);
    d.grid.lat_degrees = r.f64s(d.grid.n_lat);
    d.years.resize(static_cast<std::size_t>(n_years));
    for (int& y : d.years) y = r.i32();
    d.co2 = r.f64s(d.years.size());
    d.ch4 = r.f64s(d.years.size());
    const auto ny = static_cast<std::size_t>(n_years);
    const auto nc = static_cast<std::size_t>(cells);
    try {
        d.so2 = DenseMatrix(ny, nc, r.f64s(ny * nc));
        d.bc = DenseMatrix(ny, nc, r.f64s(ny * nc));
        for (Variable v : kAllVariables)
            if (mask & (1u << static_cast<unsigned>(v))) d.set_output(v, DenseMatrix(ny, nc, r.f64s(ny * nc)));
        d.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::TruncatedFile) throw;
        throw Error(ErrorCode::InvalidHeader, e.what());
    }
    return d;
}

void write_cbx(const ScenarioDataset& d, const std::filesystem::path& path) {
    detail::write_file_bytes(path.string(), encode_cbx(d));
}

ScenarioDataset read_cbx(const std::filesystem::path& path) {
    return decode_cbx(detail::read_file_bytes(path.string()), path.stem().string());
}

}  // namespace kremu
