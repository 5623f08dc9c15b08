#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kremu/emulator.hpp"
#include "kremu/eval.hpp"

namespace kremu::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

int exit_code_for(ErrorCode code) noexcept;

/// Runs one command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---- settings ----------------------------------------------------------------------------

/// Flat key=value settings. Keys use underscores; '-' in keys is normalized to '_'.
using Settings = std::map<std::string, std::string>;

/// '#' starts a comment line; blank lines are skipped. Unknown keys and malformed lines
/// throw InvalidArgument mentioning `origin` and the line number.
Settings parse_config_text(std::string_view text, std::string_view origin);
Settings read_config_file(const std::filesystem::path& path);

/// true/1/yes or false/0/no; anything else throws InvalidArgument.
bool parse_bool_setting(std::string_view key, std::string_view value);

/// Later maps win.
Settings merge(const Settings& base, const Settings& override_with);

/// Builds and validates an emulator configuration. Throws InvalidArgument, SyntaxError etc.
///  - gpr: `noise` pins the noise variance and disables LML grid selection
///  - krr: `lambda` pins the regularizer and disables CV; `kernel` pins the CV candidates to one kernel
EmulatorConfig emulator_config(const Settings& s);

/// "default" or a comma-separated list of windows (see parse_window).
std::vector<LeadTimeWindow> windows_from(std::string_view spec);

/// Comma-separated variable names.
std::vector<Variable> variables_from(std::string_view spec);

struct Manifest {
    std::vector<std::filesystem::path> files;  // resolved against the manifest directory
    std::size_t test_index = 0;                // `test=` entry, else the last file
    Settings parameters;                       // everything other than file= / test=
};

/// Reads <dir>/manifest.txt.
Manifest read_manifest(const std::filesystem::path& dir);
std::string format_manifest(const Settings& parameters, const std::vector<std::string>& files);

}  // namespace kremu::cli
