#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dafermos::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by parse_args for --help; carries the usage text.
struct HelpRequested : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitStrict = 2;

const std::vector<std::string>& command_names();

// Keys accepted in config files and as flags (flag form: --key with '_' written as '-').
const std::vector<std::string>& config_keys();

struct RunConfig {
    std::string command;
    std::string model;           // preset name
    nlohmann::json model_spec;   // user model, null when a preset is used
    double eps = 0.05;
    std::vector<double> eps_ladder;
    double p = 1.0;
    double M = 0.0;              // 0: automatic
    std::size_t grid = 0;        // 0: automatic
    double fix_tol = 1e-10;
    int max_iters = 5000;
    double relaxation = 0.0;     // 0: solver default
    std::vector<double> uL, uR;
    int samples = 100;
    std::string out;
    bool strict = false;
    std::uint64_t seed = 0;

    nlohmann::json echo;         // effective values with the source of each key and any overridden file values
};

// Effective key/value view of a config, in the config file format.
nlohmann::json to_json(const RunConfig& config);

// Merges an optional config file with flag values (flags win) and validates the result.
// flags maps config keys to values already converted to JSON.
RunConfig parse_config(const std::optional<std::string>& path, const nlohmann::json& flags);

// Command line front end: "dafermos <command> [--config FILE] [--key value ...]".
RunConfig parse_args(int argc, const char* const* argv);

// SHA-256 of the canonical effective config.
std::string inputs_hash(const RunConfig& config);
std::string sha256_hex(const std::string& data);

// Executes the command and writes its artifacts; returns the exit code.
int run(const RunConfig& config);

}  // namespace dafermos::cli
