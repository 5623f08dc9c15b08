#include <string_view>

#include "binary_io.hpp"
#include "kremu/emulator.hpp"

namespace kremu {

namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr std::string_view kMagic = "KRB1";

enum class ComponentTag : std::uint32_t { Gpr = 0, Svr = 1, Krr = 2 };

// ---- writers -----------------------------------------------------------------------------

void put(ByteWriter& w, const DenseVector& v) {
    w.u64(v.size());
    w.f64s(v.span());
}

void put(ByteWriter& w, const DenseMatrix& m) {
    w.u64(m.rows());
    w.u64(m.cols());
    w.f64s(m.span());
}

void put(ByteWriter& w, const std::vector<double>& v) {
    w.u64(v.size());
    w.f64s(v);
}

void put(ByteWriter& w, const KernelExpr& k) { w.str(print_kernel(k)); }

void put(ByteWriter& w, const EofBasis& b) {
    put(w, b.mean_field);
    put(w, b.components);
    put(w, b.singular_values);
    w.f64(b.total_variance);
    w.u64(b.k);
}

void put(ByteWriter& w, const FeatureModel& f) {
    w.u32(f.spec.mode == AerosolMode::GlobalMean ? 0 : 1);
    w.u64(f.spec.aerosol_k);
    w.u64(f.grid.n_lat);
    w.u64(f.grid.n_lon);
    put(w, f.grid.lat_degrees);
    for (const auto* basis : {&f.so2_basis, &f.bc_basis}) {
        w.u32(basis->has_value() ? 1 : 0);
        if (*basis) put(w, **basis);
    }
    put(w, f.offset);
    put(w, f.scale);
    w.u64(f.names.size());
    for (const auto& n : f.names) w.str(n);
}

void put(ByteWriter& w, const ComponentModel& m) {
    if (const auto* g = std::get_if<GprModel>(&m)) {
        w.u32(static_cast<std::uint32_t>(ComponentTag::Gpr));
        put(w, g->x_train);
        put(w, g->alpha);
        put(w, g->factor.l);
        w.f64(g->factor.jitter_applied);
        put(w, g->kernel);
        w.f64(g->noise_variance);
        w.f64(g->y_mean);
    } else if (const auto* s = std::get_if<SvrModel>(&m)) {
        w.u32(static_cast<std::uint32_t>(ComponentTag::Svr));
        put(w, s->x_support);
        put(w, s->dual_coef);
        w.f64(s->bias);
        put(w, s->kernel);
        w.f64(s->epsilon);
        w.f64(s->c);
    } else {
        const auto& k = std::get<KrrModel>(m);
        w.u32(static_cast<std::uint32_t>(ComponentTag::Krr));
        put(w, k.x_train);
        put(w, k.alpha);
        w.f64(k.bias);
        put(w, k.kernel);
        w.f64(k.lambda);
    }
}

void section(ByteWriter& out, std::string_view tag, ByteWriter&& payload) {
    out.bytes(tag);
    const auto bytes = payload.take();
    out.u64(bytes.size());
    out.buffer().insert(out.buffer().end(), bytes.begin(), bytes.end());
}

// ---- readers -----------------------------------------------------------------------------

std::size_t get_size(ByteReader& r) {
    const std::uint64_t n = r.u64();
    if (n > r.remaining()) throw Error(ErrorCode::TruncatedFile, "count " + std::to_string(n) + " exceeds payload");
    return static_cast<std::size_t>(n);
}

std::vector<double> get_doubles(ByteReader& r) { return r.f64s(get_size(r)); }

DenseVector get_vector(ByteReader& r) { return DenseVector(get_doubles(r)); }

DenseMatrix get_matrix(ByteReader& r) {
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (cols != 0 && rows > r.remaining() / 8 / cols) throw Error(ErrorCode::TruncatedFile, "matrix exceeds payload");
    return DenseMatrix(rows, cols, r.f64s(rows * cols));
}

KernelExpr get_kernel(ByteReader& r) { return parse_kernel(r.str()); }

EofBasis get_basis(ByteReader& r) {
    EofBasis b;
    b.mean_field = get_vector(r);
    b.components = get_matrix(r);
    b.singular_values = get_vector(r);
    b.total_variance = r.f64();
    b.k = r.u64();
    if (b.components.rows() != b.k || b.components.cols() != b.mean_field.size() || b.singular_values.size() != b.k) {
        throw Error(ErrorCode::InvalidHeader, "inconsistent EOF basis shapes");
    }
    return b;
}

FeatureModel get_features(ByteReader& r) {
    FeatureModel f;
    const std::uint32_t mode = r.u32();
    if (mode > 1) throw Error(ErrorCode::InvalidHeader, "unknown feature mode");
    f.spec.mode = mode == 0 ? AerosolMode::GlobalMean : AerosolMode::Eof;
    f.spec.aerosol_k = r.u64();
    f.grid.n_lat = r.u64();
    f.grid.n_lon = r.u64();
    f.grid.lat_degrees = get_doubles(r);
    for (auto* basis : {&f.so2_basis, &f.bc_basis}) {
        if (r.u32() != 0) *basis = get_basis(r);
    }
    f.offset = get_doubles(r);
    f.scale = get_doubles(r);
    const std::size_t n = get_size(r);
    for (std::size_t i = 0; i < n; ++i) f.names.push_back(r.str());
    if (f.offset.size() != f.names.size() || f.scale.size() != f.names.size()) {
        throw Error(ErrorCode::InvalidHeader, "feature statistics do not match feature names");
    }
    if (f.spec.mode == AerosolMode::Eof && (!f.so2_basis || !f.bc_basis)) {
        throw Error(ErrorCode::InvalidHeader, "EOF feature mode without aerosol bases");
    }
    return f;
}

ComponentModel get_component(ByteReader& r) {
    const std::uint32_t tag = r.u32();
    switch (static_cast<ComponentTag>(tag)) {
        case ComponentTag::Gpr: {
            GprModel g;
            g.x_train = get_matrix(r);
            g.alpha = get_vector(r);
            g.factor.l = get_matrix(r);
            g.factor.jitter_applied = r.f64();
            g.kernel = get_kernel(r);
            g.noise_variance = r.f64();
            g.y_mean = r.f64();
            return g;
        }
        case ComponentTag::Svr: {
            SvrModel s;
            s.x_support = get_matrix(r);
            s.dual_coef = get_vector(r);
            s.bias = r.f64();
            s.kernel = get_kernel(r);
            s.epsilon = r.f64();
            s.c = r.f64();
            return s;
        }
        case ComponentTag::Krr: {
            KrrModel k;
            k.x_train = get_matrix(r);
            k.alpha = get_vector(r);
            k.bias = r.f64();
            k.kernel = get_kernel(r);
            k.lambda = r.f64();
            return k;
        }
    }
    throw Error(ErrorCode::InvalidHeader, "unknown regressor tag " + std::to_string(tag));
}

VariableEmulator get_variable(ByteReader& r) {
    VariableEmulator ve;
    const std::uint32_t v = r.u32();
    if (v > 3) throw Error(ErrorCode::InvalidHeader, "unknown variable id " + std::to_string(v));
    ve.variable = static_cast<Variable>(v);
    ve.basis = get_basis(r);
    ve.coef_scale = get_doubles(r);
    const std::size_t n = get_size(r);
    for (std::size_t i = 0; i < n; ++i) ve.models.push_back(get_component(r));
    if (ve.models.size() != ve.basis.k || ve.coef_scale.size() != ve.basis.k) {
        throw Error(ErrorCode::InvalidHeader, "component count does not match the EOF basis");
    }
    return ve;
}

}  // namespace

std::vector<std::uint8_t> encode_bundle(const Emulator& e) {
    ByteWriter out;
    out.bytes(kMagic);
    {
        ByteWriter p;
        p.u32(static_cast<std::uint32_t>(e.model));
        p.u64(e.svr_unconverged);
        p.str(e.config_echo);
        section(out, "CONF", std::move(p));
    }
    {
        ByteWriter p;
        put(p, e.features);
        section(out, "FEAT", std::move(p));
    }
    for (const auto& ve : e.variables) {
        ByteWriter p;
        p.u32(static_cast<std::uint32_t>(ve.variable));
        put(p, ve.basis);
        put(p, ve.coef_scale);
        p.u64(ve.models.size());
        for (const auto& m : ve.models) put(p, m);
        section(out, "VARB", std::move(p));
    }
    section(out, "END_", ByteWriter{});
    return out.take();
}

Emulator decode_bundle(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (bytes.size() < kMagic.size()) throw Error(ErrorCode::TruncatedFile, "file shorter than the bundle magic");
    if (r.bytes(kMagic.size()) != kMagic) throw Error(ErrorCode::BadMagic, "not a KRB1 model bundle");

    Emulator e;
    bool have_conf = false, have_feat = false, done = false;
    while (!done) {
        const std::string tag = r.bytes(4);
        const std::uint64_t len = r.u64();
        if (len > r.remaining()) throw Error(ErrorCode::TruncatedFile, "section " + tag + " runs past the end");
        ByteReader s(bytes.subspan(r.position(), static_cast<std::size_t>(len)));
        r.bytes(static_cast<std::size_t>(len));
        try {
            if (tag == "CONF") {
                const std::uint32_t kind = s.u32();
                if (kind > 2) throw Error(ErrorCode::InvalidHeader, "unknown model kind");
                e.model = static_cast<ModelKind>(kind);
                e.svr_unconverged = s.u64();
                e.config_echo = s.str();
                have_conf = true;
            } else if (tag == "FEAT") {
                e.features = get_features(s);
                have_feat = true;
            } else if (tag == "VARB") {
                e.variables.push_back(get_variable(s));
            } else if (tag == "END_") {
                done = true;
            } else {
                throw Error(ErrorCode::InvalidHeader, "unknown section tag '" + tag + "'");
            }
        } catch (const Error& err) {
            // Anything malformed inside a length-checked section is a format error.
            if (err.code() == ErrorCode::InvalidHeader) throw;
            throw Error(ErrorCode::InvalidHeader, "section " + tag + ": " + err.what());
        }
        if (s.remaining() != 0) throw Error(ErrorCode::InvalidHeader, "section " + tag + " has trailing bytes");
    }
    if (r.remaining() != 0) throw Error(ErrorCode::InvalidHeader, "trailing bytes after END_ section");
    if (!have_conf || !have_feat) throw Error(ErrorCode::InvalidHeader, "bundle lacks CONF or FEAT section");
    return e;
}

void write_bundle(const Emulator& e, const std::filesystem::path& path) {
    detail::write_file_bytes(path.string(), encode_bundle(e));
}

Emulator read_bundle(const std::filesystem::path& path) { return decode_bundle(detail::read_file_bytes(path.string())); }

}  // namespace kremu
