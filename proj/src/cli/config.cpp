#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kremu/cli.hpp"

namespace kremu::cli {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "model",   "models",    "kernel",     "noise",   "lambda",   "epsilon",          "c",
        "tol",     "max_iter",  "eof_k",      "features", "aerosol_k", "seed",           "variables",
        "windows", "unweighted", "gpr_lengthscales", "gpr_variances", "gpr_noises",     "krr_lambdas",
        "krr_folds", "krr_kernels"};
    return keys;
}

std::string normalize_key(std::string_view k) {
    std::string s(k);
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        parts.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return parts;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(key) + "=" + std::string(value) + ": " + std::string(why));
}

double to_double(std::string_view key, std::string_view v) {
    double d = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d)) bad(key, v, "not a finite number");
    return d;
}

double to_positive(std::string_view key, std::string_view v) {
    const double d = to_double(key, v);
    if (!(d > 0.0)) bad(key, v, "must be > 0");
    return d;
}

std::uint64_t to_count(std::string_view key, std::string_view v, std::uint64_t min_value) {
    std::uint64_t n = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad(key, v, "not a non-negative integer");
    if (n < min_value) bad(key, v, "must be >= " + std::to_string(min_value));
    return n;
}

std::vector<double> to_positive_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    for (auto part : split(v, ',')) out.push_back(to_positive(key, part));
    return out;
}

const std::string* find(const Settings& s, const char* key) {
    const auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
}

}  // namespace

bool parse_bool_setting(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, v, "expected true or false");
}

Settings parse_config_text(std::string_view text, std::string_view origin) {
    Settings s;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, where + ": expected key=value");
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        if (!known_keys().contains(key)) throw Error(ErrorCode::InvalidArgument, where + ": unknown key '" + key + "'");
        s[key] = std::string(trim(line.substr(eq + 1)));
    }
    return s;
}

Settings read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

Settings merge(const Settings& base, const Settings& override_with) {
    Settings out = base;
    for (const auto& [k, v] : override_with) out[k] = v;
    return out;
}

std::vector<Variable> variables_from(std::string_view spec) {
    std::vector<Variable> out;
    for (auto part : split(spec, ',')) {
        const auto v = parse_variable(part);
        if (!v) bad("variables", spec, "unknown variable '" + std::string(part) + "'");
        if (std::find(out.begin(), out.end(), *v) != out.end()) bad("variables", spec, "duplicate variable");
        out.push_back(*v);
    }
    return out;
}

std::vector<LeadTimeWindow> windows_from(std::string_view spec) {
    if (trim(spec) == "default") return default_windows();
    std::vector<LeadTimeWindow> out;
    for (auto part : split(spec, ',')) out.push_back(parse_window(part));
    return out;
}

EmulatorConfig emulator_config(const Settings& s) {
    EmulatorConfig c;
    if (const auto* v = find(s, "model")) {
        const auto m = parse_model_kind(*v);
        if (!m) bad("model", *v, "expected gpr, svr or krr");
        c.model = *m;
    }
    if (const auto* v = find(s, "features")) {
        if (*v == "global-mean" || *v == "global_mean") c.features.mode = AerosolMode::GlobalMean;
        else if (*v == "eof") c.features.mode = AerosolMode::Eof;
        else bad("features", *v, "expected global-mean or eof");
    }
    if (const auto* v = find(s, "aerosol_k")) c.features.aerosol_k = to_count("aerosol_k", *v, 1);
    if (const auto* v = find(s, "eof_k")) c.eof_k = to_count("eof_k", *v, 1);
    if (const auto* v = find(s, "seed")) c.seed = to_count("seed", *v, 0);
    if (const auto* v = find(s, "variables")) c.variables = variables_from(*v);

    const std::string* kernel = find(s, "kernel");
    std::optional<KernelExpr> k;
    if (kernel) k = parse_kernel(*kernel);

    // GPR
    if (k) c.gpr.kernel = *k;
    if (const auto* v = find(s, "noise")) {
        const double n = to_double("noise", *v);
        if (n < 0.0) bad("noise", *v, "must be >= 0");
        c.gpr.noise_variance = n;
        c.gpr.select = false;
    }
    if (const auto* v = find(s, "gpr_lengthscales")) c.gpr.grid.lengthscales = to_positive_list("gpr_lengthscales", *v);
    if (const auto* v = find(s, "gpr_variances")) c.gpr.grid.variances = to_positive_list("gpr_variances", *v);
    if (const auto* v = find(s, "gpr_noises")) c.gpr.grid.noise_variances = to_positive_list("gpr_noises", *v);

    // SVR
    if (k) c.svr.kernel = *k;
    if (const auto* v = find(s, "epsilon")) {
        c.svr.epsilon = to_double("epsilon", *v);
        if (c.svr.epsilon < 0.0) bad("epsilon", *v, "must be >= 0");
    }
    if (const auto* v = find(s, "c")) c.svr.c = to_positive("c", *v);
    if (const auto* v = find(s, "tol")) c.svr.tol = to_positive("tol", *v);
    if (const auto* v = find(s, "max_iter")) c.svr.max_iter = to_count("max_iter", *v, 1);

    // KRR
    if (k) {
        c.krr.kernel = *k;
        c.krr.grid.kernel_candidates = {*k};
    }
    if (const auto* v = find(s, "krr_kernels")) {
        c.krr.grid.kernel_candidates.clear();
        for (auto part : split(*v, ';')) c.krr.grid.kernel_candidates.push_back(parse_kernel(part));
    }
    if (const auto* v = find(s, "krr_lambdas")) c.krr.grid.lambdas = to_positive_list("krr_lambdas", *v);
    if (const auto* v = find(s, "krr_folds")) c.krr.grid.folds = to_count("krr_folds", *v, 2);
    if (const auto* v = find(s, "lambda")) {
        c.krr.lambda = to_positive("lambda", *v);
        c.krr.select = false;
    }
    return c;
}

Manifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.txt";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    Manifest m;
    std::optional<std::string> test;
    std::vector<std::string> names;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key == "file") names.push_back(value);
        else if (key == "test") test = value;
        else m.parameters[key] = value;
    }
    if (names.empty()) throw Error(ErrorCode::InvalidArgument, path.string() + " lists no files");
    for (const auto& n : names) m.files.push_back(dir / n);
    m.test_index = names.size() - 1;
    if (test) {
        const auto it = std::find(names.begin(), names.end(), *test);
        if (it == names.end()) throw Error(ErrorCode::InvalidArgument, "test=" + *test + " is not one of the listed files");
        m.test_index = static_cast<std::size_t>(it - names.begin());
    }
    return m;
}

std::string format_manifest(const Settings& parameters, const std::vector<std::string>& files) {
    std::string out = "# kremu scenario manifest\n";
    for (const auto& [k, v] : parameters) out += k + "=" + v + "\n";
    for (const auto& f : files) out += "file=" + f + "\n";
    return out;
}

}  // namespace kremu::cli
