#include "kremu/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace kremu::cli {

namespace {

namespace fs = std::filesystem;

// Setting keys exposed as --flags on train and benchmark, mirrored by the config file.
constexpr const char* kModelKeys[] = {"kernel",    "noise",         "lambda",        "epsilon",    "c",
                                      "tol",       "max_iter",      "eof_k",         "features",   "aerosol_k",
                                      "seed",      "variables",     "gpr_lengthscales", "gpr_variances",
                                      "gpr_noises", "krr_lambdas",  "krr_folds",     "krr_kernels"};

std::string flag_name(std::string_view key) {
    std::string s = "--" + std::string(key);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

/// String-valued options whose presence on the command line overrides the config file.
struct FlagSettings {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void add(CLI::App* app, const std::string& key, const std::string& help) {
        options[key] = app->add_option(flag_name(key), values[key], help);
    }

    [[nodiscard]] Settings given() const {
        Settings s;
        for (const auto& [k, opt] : options)
            if (opt->count() > 0) s[k] = values.at(k);
        return s;
    }
};

void add_model_flags(CLI::App* app, FlagSettings& f) {
    for (const char* key : kModelKeys) f.add(app, key, "see README (config key '" + std::string(key) + "')");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<Variable> common_variables(std::span<const ScenarioDataset> ds) {
    std::vector<Variable> out;
    for (Variable v : kAllVariables) {
        if (std::all_of(ds.begin(), ds.end(), [v](const ScenarioDataset& d) { return d.has(v); })) out.push_back(v);
    }
    if (out.empty()) throw Error(ErrorCode::MissingVariable, "no output variable is present in every dataset");
    return out;
}

Settings load_settings(const std::string& config_path, const FlagSettings& flags) {
    Settings base;
    if (!config_path.empty()) base = read_config_file(config_path);
    return merge(base, flags.given());
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    std::size_t h = 0, w = 0;
    bool ok = x != std::string::npos;
    if (ok) {
        const auto r1 = std::from_chars(text.data(), text.data() + x, h);
        const auto r2 = std::from_chars(text.data() + x + 1, text.data() + text.size(), w);
        ok = r1.ec == std::errc() && r1.ptr == text.data() + x && r2.ec == std::errc() &&
             r2.ptr == text.data() + text.size() && h > 0 && w > 0;
    }
    if (!ok) throw Error(ErrorCode::InvalidArgument, "--grid expects HxW with positive integers, got '" + text + "'");
    return {h, w};
}

fs::path variance_sidecar(const fs::path& out) {
    fs::path p = out;
    if (p.extension() == ".cbx") p.replace_extension();
    p += ".var.cbx";
    return p;
}

// ---- commands ----------------------------------------------------------------------------

struct SynthArgs {
    std::uint64_t seed = 0;
    std::size_t scenarios = 4;
    std::size_t years = 50;
    std::string grid = "8x16";
    double noise = 0.1;
    int end_year = 2100;
    std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    SynthConfig cfg;
    cfg.seed = a.seed;
    cfg.n_scenarios = a.scenarios;
    cfg.n_years = a.years;
    std::tie(cfg.n_lat, cfg.n_lon) = parse_grid(a.grid);
    cfg.noise = a.noise;
    cfg.end_year = a.end_year;
    if (!(a.noise >= 0.0) || !std::isfinite(a.noise)) {
        throw Error(ErrorCode::InvalidArgument, "--noise must be a finite fraction >= 0");
    }
    const auto scenarios = synth_scenarios(cfg);

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::string> files;
    for (const auto& d : scenarios) {
        files.push_back(d.name + ".cbx");
        write_cbx(d, dir / files.back());
    }
    Settings params{{"seed", std::to_string(a.seed)},
                    {"scenarios", std::to_string(a.scenarios)},
                    {"years", std::to_string(a.years)},
                    {"grid", std::to_string(cfg.n_lat) + "x" + std::to_string(cfg.n_lon)},
                    {"noise", format_double(a.noise)},
                    {"end_year", std::to_string(a.end_year)},
                    {"first_year", std::to_string(scenarios.front().years.front())}};
    std::string manifest = format_manifest(params, files);
    manifest += "test=" + files.back() + "\n";
    write_text(dir / "manifest.txt", manifest);
    out << "wrote " << files.size() << " scenarios to " << dir.string() << "\n";
    return kOk;
}

struct TrainArgs {
    std::string model;
    std::vector<std::string> data;
    std::string config;
    std::string out;
};

int cmd_train(const TrainArgs& a, const FlagSettings& flags, std::ostream& out, std::ostream& err) {
    Settings s = load_settings(a.config, flags);
    if (!a.model.empty()) s["model"] = a.model;
    EmulatorConfig cfg = emulator_config(s);

    std::vector<ScenarioDataset> train;
    for (const auto& p : a.data) train.push_back(read_cbx(p));
    if (!s.contains("variables")) cfg.variables = common_variables(train);

    const Emulator e = train_emulator(train, cfg);
    write_bundle(e, a.out);
    if (e.svr_unconverged > 0) {
        err << "warning: " << e.svr_unconverged << " SVR component fit(s) stopped at max_iter before reaching tol\n";
    }
    out << "trained " << model_kind_name(e.model) << " on " << train.size() << " scenario(s), " << e.variables.size()
        << " variable(s); bundle written to " << a.out << "\n";
    return kOk;
}

struct PredictArgs {
    std::string model_file;
    std::string data;
    std::string out;
    bool with_variance = false;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const Emulator e = read_bundle(a.model_file);
    if (a.with_variance && e.model != ModelKind::Gpr) {
        throw Error(ErrorCode::InvalidArgument,
                    "--with-variance needs a GPR bundle; this one holds " + std::string(model_kind_name(e.model)));
    }
    const ScenarioDataset input = read_cbx(a.data);
    ScenarioDataset pred = e.predict(input);
    std::optional<ScenarioDataset> var;
    if (a.with_variance) var = e.predict_variance(input);
    write_cbx(pred, a.out);
    out << "wrote predictions to " << a.out << "\n";
    if (var) {
        const fs::path side = variance_sidecar(a.out);
        write_cbx(*var, side);
        out << "wrote variances to " << side.string() << "\n";
    }
    return kOk;
}

struct EvaluateArgs {
    std::string pred;
    std::string truth;
    std::string windows = "default";
    std::string variables;
    std::string csv;
    bool unweighted = false;
};

void emit_report(const EvalReport& r, const std::string& csv_path, std::ostream& out) {
    out << r.to_table();
    if (csv_path.empty()) {
        out << "\n" << r.to_csv();
    } else {
        write_text(csv_path, r.to_csv());
        out << "\nCSV written to " << csv_path << "\n";
    }
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const ScenarioDataset pred = read_cbx(a.pred);
    const ScenarioDataset truth = read_cbx(a.truth);
    const std::vector<LeadTimeWindow> windows = windows_from(a.windows);
    std::vector<Variable> vars;
    if (!a.variables.empty()) {
        vars = variables_from(a.variables);
    } else {
        const ScenarioDataset both[] = {pred, truth};
        vars = common_variables(both);
    }
    const std::string label = fs::path(a.pred).stem().string();
    const EvalReport r =
        evaluate_predictions(std::span<const ScenarioDataset>(&pred, 1), std::span<const std::string>(&label, 1), truth,
                             vars, windows, !a.unweighted);
    emit_report(r, a.csv, out);
    return kOk;
}

struct BenchmarkArgs {
    std::string data;
    std::string config;
    std::string csv;
    std::string models;
    std::string windows;
    bool unweighted = false;
};

int cmd_benchmark(const BenchmarkArgs& a, const FlagSettings& flags, std::ostream& out) {
    Settings s = load_settings(a.config, flags);
    if (!a.models.empty()) s["models"] = a.models;
    if (!a.windows.empty()) s["windows"] = a.windows;
    if (a.unweighted) s["unweighted"] = "true";

    BenchmarkConfig bc;
    if (const auto it = s.find("models"); it != s.end()) {
        bc.models.clear();
        for (std::size_t start = 0; start <= it->second.size();) {
            const auto comma = std::min(it->second.find(',', start), it->second.size());
            const std::string name = it->second.substr(start, comma - start);
            const auto m = parse_model_kind(name);
            if (!m) throw Error(ErrorCode::InvalidArgument, "models: unknown model '" + name + "'");
            bc.models.push_back(*m);
            start = comma + 1;
        }
    }
    if (const auto it = s.find("windows"); it != s.end()) bc.windows = windows_from(it->second);
    if (const auto it = s.find("unweighted"); it != s.end()) {
        bc.area_weighted = !parse_bool_setting("unweighted", it->second);
    }
    s.erase("models");
    s.erase("windows");
    s.erase("unweighted");
    s.erase("model");
    bc.emulator = emulator_config(s);

    const Manifest m = read_manifest(a.data);
    if (m.files.size() < 2) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least two scenarios");
    std::vector<ScenarioDataset> train;
    std::optional<ScenarioDataset> test;
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        ScenarioDataset d = read_cbx(m.files[i]);
        if (i == m.test_index) test = std::move(d);
        else train.push_back(std::move(d));
    }
    if (!s.contains("variables")) {
        std::vector<ScenarioDataset> all = train;
        all.push_back(*test);
        bc.emulator.variables = common_variables(all);
    }
    const EvalReport r = run_benchmark(train, *test, bc);
    emit_report(r, a.csv, out);
    return kOk;
}

struct ExportArgs {
    std::string in;
    std::string variable;
    int year = 0;
    std::string format = "pgm";
    std::string out;
};

int cmd_export_grid(const ExportArgs& a, std::ostream& out) {
    const ScenarioDataset d = read_cbx(a.in);
    const auto v = parse_variable(a.variable);
    if (!v) throw Error(ErrorCode::InvalidArgument, "unknown variable '" + a.variable + "'");
    const auto t = d.year_index(a.year);
    if (!t) throw Error(ErrorCode::InvalidArgument, "year " + std::to_string(a.year) + " not in " + a.in);
    const auto field = d.output(*v).row(*t);
    const Grid& g = d.grid;

    if (a.format == "csv") {
        std::string text = "lat,lon,value\n";
        for (std::size_t i = 0; i < g.n_lat; ++i)
            for (std::size_t j = 0; j < g.n_lon; ++j)
                text += format_double(g.lat_degrees[i]) + "," + format_double(g.lon_degrees(j)) + "," +
                        format_double(field[i * g.n_lon + j]) + "\n";
        write_text(a.out, text);
    } else if (a.format == "pgm") {
        const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
        const double lo = *lo_it, range = *hi_it - *lo_it;
        std::string img = "P5\n" + std::to_string(g.n_lon) + " " + std::to_string(g.n_lat) + "\n255\n";
        for (std::size_t r = 0; r < g.n_lat; ++r) {
            const std::size_t i = g.n_lat - 1 - r;  // north at the top
            for (std::size_t j = 0; j < g.n_lon; ++j) {
                const double x = range > 0.0 ? (field[i * g.n_lon + j] - lo) / range : 0.0;
                img.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * x))));
            }
        }
        write_text(a.out, img);
    } else {
        throw Error(ErrorCode::InvalidArgument, "--format must be pgm or csv");
    }
    out << "wrote " << a.format << " grid to " << a.out << "\n";
    return kOk;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IoError:
        case ErrorCode::BadMagic:
        case ErrorCode::TruncatedFile:
        case ErrorCode::InvalidHeader:
            return kIo;
        case ErrorCode::NotPositiveDefinite:
        case ErrorCode::NotSymmetric:
        case ErrorCode::NoConvergence:
        case ErrorCode::NonFinite:
            return kNumerical;
        default:
            return kUsage;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel-regression climate emulator: synthesize, train, predict and score CBX scenarios", "kremu"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Write seeded synthetic scenarios and a manifest");
    s->add_option("--seed", synth.seed, "generator seed");
    s->add_option("--scenarios", synth.scenarios, "number of scenarios (last one is the test split)")
        ->check(CLI::PositiveNumber);
    s->add_option("--years", synth.years, "years per scenario")->check(CLI::PositiveNumber);
    s->add_option("--grid", synth.grid, "grid as HxW (lat x lon)");
    s->add_option("--noise", synth.noise, "noise amplitude as a fraction of the signal amplitude");
    s->add_option("--end-year", synth.end_year, "last year of every scenario");
    s->add_option("--out", synth.out, "output directory")->required();

    TrainArgs train;
    FlagSettings train_flags;
    auto* t = app.add_subcommand("train", "Fit an emulator and write a model bundle");
    t->add_option("--model", train.model, "gpr, svr or krr");
    t->add_option("--data", train.data, "training CBX files")->required()->expected(1, -1);
    t->add_option("--config", train.config, "key=value config file (flags take precedence)");
    t->add_option("--out", train.out, "model bundle path")->required();
    add_model_flags(t, train_flags);

    PredictArgs predict;
    auto* p = app.add_subcommand("predict", "Emulate outputs for a CBX input file");
    p->add_option("--model-file", predict.model_file, "model bundle")->required();
    p->add_option("--data", predict.data, "input CBX file")->required();
    p->add_option("--out", predict.out, "output CBX path")->required();
    p->add_flag("--with-variance", predict.with_variance, "GPR only: also write <out>.var.cbx");

    EvaluateArgs evaluate;
    auto* e = app.add_subcommand("evaluate", "Windowed RMSE of a prediction against truth");
    e->add_option("--pred", evaluate.pred, "predicted CBX")->required();
    e->add_option("--truth", evaluate.truth, "truth CBX")->required();
    e->add_option("--windows", evaluate.windows, "'default' or a list like 2050,2045-2055,late=2081-2100");
    e->add_option("--variables", evaluate.variables, "comma-separated variables (default: all shared)");
    e->add_option("--csv", evaluate.csv, "write the CSV report here instead of stdout");
    e->add_flag("--unweighted", evaluate.unweighted, "disable cos(latitude) weighting");

    BenchmarkArgs bench;
    FlagSettings bench_flags;
    auto* b = app.add_subcommand("benchmark", "Train GPR, SVR and KRR on a manifest split and compare");
    b->add_option("--data", bench.data, "directory containing manifest.txt")->required();
    b->add_option("--config", bench.config, "key=value config file (flags take precedence)");
    b->add_option("--csv", bench.csv, "write the CSV report here instead of stdout");
    b->add_option("--models", bench.models, "comma-separated subset of gpr,svr,krr");
    b->add_option("--windows", bench.windows, "'default' or a custom window list");
    b->add_flag("--unweighted", bench.unweighted, "disable cos(latitude) weighting");
    add_model_flags(b, bench_flags);

    ExportArgs ex;
    auto* x = app.add_subcommand("export-grid", "Write one field as PGM image or lat,lon,value CSV");
    x->add_option("--in", ex.in, "CBX file")->required();
    x->add_option("--variable", ex.variable, "tas, dtr, pr or pr90")->required();
    x->add_option("--year", ex.year, "year to export")->required();
    x->add_option("--format", ex.format, "pgm or csv");
    x->add_option("--out", ex.out, "output path")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h, out, err);
    } catch (const CLI::CallForAllHelp& h) {
        return app.exit(h, out, err);
    } catch (const CLI::ParseError& pe) {
        app.exit(pe, out, err);
        return kUsage;
    }

    try {
        if (s->parsed()) return cmd_synth(synth, out);
        if (t->parsed()) return cmd_train(train, train_flags, out, err);
        if (p->parsed()) return cmd_predict(predict, out);
        if (e->parsed()) return cmd_evaluate(evaluate, out);
        if (b->parsed()) return cmd_benchmark(bench, bench_flags, out);
        if (x->parsed()) return cmd_export_grid(ex, out);
    } catch (const SyntaxError& se) {
        err << "error: invalid kernel string: " << se.what() << "\n";
        return kUsage;
    } catch (const Error& ex_err) {
        err << "error: " << ex_err.what() << "\n";
        return exit_code_for(ex_err.code());
    } catch (const fs::filesystem_error& fe) {
        err << "error: " << fe.what() << "\n";
        return kIo;
    } catch (const std::exception& other) {
        err << "error: " << other.what() << "\n";
        return 1;
    }
    return kUsage;
}

}  // namespace kremu::cli
