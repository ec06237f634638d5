#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "dafermos/color_profile.hpp"
#include "dafermos/diagnostics.hpp"
#include "dafermos/presets.hpp"
#include "dafermos/scalar_solver.hpp"
#include "dafermos/spectral.hpp"
#include "dafermos/system_solver.hpp"
#include "dafermos/wave_measures.hpp"

namespace dafermos::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;
const char* const kProvenanceKey = "provenance";

enum class KeyType { String, Double, DoubleList, Int, UInt, Bool, Object };

const std::map<std::string, KeyType>& key_types() {
    static const std::map<std::string, KeyType> types = {
        {"command", KeyType::String},  {"model", KeyType::String},     {"model_spec", KeyType::Object},
        {"eps", KeyType::Double},      {"eps_ladder", KeyType::DoubleList}, {"p", KeyType::Double},
        {"M", KeyType::Double},        {"grid", KeyType::Int},         {"fix_tol", KeyType::Double},
        {"max_iters", KeyType::Int},   {"relaxation", KeyType::Double}, {"uL", KeyType::DoubleList},
        {"uR", KeyType::DoubleList},   {"samples", KeyType::Int},      {"out", KeyType::String},
        {"strict", KeyType::Bool},     {"seed", KeyType::UInt},
    };
    return types;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

bool is_ladder_command(const std::string& command) {
    return command == "continuation" || command == "trace-report" || command == "verify-lemmas";
}

bool needs_data(const std::string& command) {
    return command == "solve-scalar" || command == "solve-system" || command == "continuation" ||
           command == "trace-report";
}

std::vector<double> default_ladder(const std::string& command) {
    if (command == "verify-lemmas") return {0.1, 0.05, 0.025, 0.0125};
    return {0.1, 0.05, 0.025};
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" used as an object key.
std::size_t line_of_key(const std::string& text, const std::string& key) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = 0;
    while ((pos = text.find(quoted, pos)) != std::string::npos) {
        std::size_t k = pos + quoted.size();
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k < text.size() && text[k] == ':') return line_of_offset(text, pos);
        pos += quoted.size();
    }
    return 0;
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": line " + std::to_string(line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)) +
                          ": invalid JSON (" + e.what() + ")");
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        double x = 0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), x);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ConfigError("invalid value for " + flag + ": '" + text + "'");
        out.push_back(x);
    }
    if (out.empty()) throw ConfigError("invalid value for " + flag + ": empty list");
    return out;
}

// Converts a raw flag string to the JSON value of its key.
json flag_value(const std::string& key, const std::string& text) {
    const std::string flag = flag_name(key);
    switch (key_types().at(key)) {
        case KeyType::String: return text;
        case KeyType::Bool: return text == "true" || text == "1";
        case KeyType::DoubleList: return parse_list(text, flag);
        case KeyType::Object: {
            const std::string body = read_file(text);
            json spec = parse_json_text(body, text);
            if (!spec.is_object()) throw ConfigError(flag + ": " + text + " must hold a JSON object");
            return spec;
        }
        case KeyType::Double: {
            double x = 0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), x);
            if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
                throw ConfigError("invalid value for " + flag + ": '" + text + "'");
            return x;
        }
        case KeyType::Int:
        case KeyType::UInt: {
            long long x = 0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), x);
            if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
                throw ConfigError("invalid value for " + flag + ": '" + text + "' is not an integer");
            if (key_types().at(key) == KeyType::UInt) {
                if (x < 0) throw ConfigError("invalid value for " + flag + ": must be nonnegative");
                return static_cast<std::uint64_t>(x);
            }
            return x;
        }
    }
    return json();
}

struct Sources {
    std::optional<std::string> path;
    std::string text;
    std::set<std::string> from_flag;

    std::string pointer(const std::string& key) const {
        if (from_flag.count(key)) return "flag " + flag_name(key);
        if (path) {
            const std::size_t line = line_of_key(text, key);
            if (line > 0) return "line " + std::to_string(line) + " of " + *path;
            return *path;
        }
        return "default";
    }
};

double get_double(const json& merged, const std::string& key, const Sources& src) {
    const json& v = merged.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number (" + src.pointer(key) + ")");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite (" + src.pointer(key) + ")");
    return x;
}

long long get_int(const json& merged, const std::string& key, const Sources& src) {
    const json& v = merged.at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer (" + src.pointer(key) + ")");
    return v.get<long long>();
}

std::vector<double> get_list(const json& merged, const std::string& key, const Sources& src) {
    const json& v = merged.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty())
        throw ConfigError("'" + key + "' must be a nonempty list of numbers (" + src.pointer(key) + ")");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("'" + key + "' must hold numbers only (" + src.pointer(key) + ")");
        out.push_back(x.get<double>());
    }
    return out;
}

void require_positive(double x, const std::string& key, const Sources& src) {
    if (!(x > 0.0)) throw ConfigError("'" + key + "' must be positive (" + src.pointer(key) + ")");
}

// Writes every artifact of a run into one directory and remembers the file list.
class OutputWriter {
public:
    explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + path.string());
        if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header) {
        for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
        os_ << "\n";
    }
    void row(const std::vector<double>& values) {
        for (std::size_t k = 0; k < values.size(); ++k) os_ << (k ? "," : "") << format_double(values[k]);
        os_ << "\n";
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

// Failure that carries a structured error record for the output directory.
struct RunFailure : std::runtime_error {
    RunFailure(const std::string& what, json record) : std::runtime_error(what), detail(std::move(record)) {}
    json detail;
};

struct LoadedModel {
    std::string name;
    bool scalar = true;
    ScalarCouplingModel s;
    SystemCouplingModel sys;
};

RealFn polynomial(const std::vector<double>& c) {
    return [c](double x) {
        double y = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) y = y * x + *it;
        return y;
    };
}

RealFn polynomial_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
    return polynomial(d);
}

// Piecewise-linear table, constant slope extension outside the nodes.
RealFn tabulated(std::vector<std::pair<double, double>> nodes) {
    std::sort(nodes.begin(), nodes.end());
    return [nodes](double x) {
        std::size_t k = 1;
        while (k + 1 < nodes.size() && nodes[k].first < x) ++k;
        const auto& [x0, y0] = nodes[k - 1];
        const auto& [x1, y1] = nodes[k];
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    };
}

void coefficient_fn(const json& spec, const std::string& where, RealFn& fn, RealFn& derivative) {
    if (spec.contains("poly")) {
        const auto c = spec.at("poly").get<std::vector<double>>();
        if (c.empty()) throw ModelError(where + ": empty polynomial");
        fn = polynomial(c);
        derivative = polynomial_derivative(c);
    } else if (spec.contains("table")) {
        std::vector<std::pair<double, double>> nodes;
        for (const auto& row : spec.at("table")) {
            if (!row.is_array() || row.size() != 2) throw ModelError(where + ": table rows must be [x, y] pairs");
            nodes.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        if (nodes.size() < 2) throw ModelError(where + ": table needs at least two rows");
        fn = tabulated(nodes);
        derivative = {};
    } else {
        throw ModelError(where + ": expected {\"poly\": [...]} or {\"table\": [[x, y], ...]}");
    }
}

HalfModel half_model(const json& spec, const std::string& side) {
    if (!spec.contains(side)) throw ModelError("model_spec: missing '" + side + "'");
    const json& s = spec.at(side);
    HalfModel half;
    if (s.contains("gamma")) {
        coefficient_fn(s.at("gamma"), "model_spec." + side + ".gamma", half.gamma, half.dgamma);
    } else {
        half.gamma = [](double u) { return u; };
        half.dgamma = [](double) { return 1.0; };
    }
    if (!s.contains("flux")) throw ModelError("model_spec." + side + ": missing 'flux'");
    coefficient_fn(s.at("flux"), "model_spec." + side + ".flux", half.flux, half.dflux);
    return half;
}

Eigen::MatrixXd matrix_from(const json& rows, int N, const std::string& where) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != N) throw ModelError(where + ": expected " + std::to_string(N) + " rows");
    Eigen::MatrixXd m(N, N);
    for (int i = 0; i < N; ++i) {
        const json& r = rows[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<int>(r.size()) != N)
            throw ModelError(where + ": row " + std::to_string(i + 1) + " must have " + std::to_string(N) + " entries");
        for (int j = 0; j < N; ++j) m(i, j) = r[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

LoadedModel load_user_model(const json& spec) {
    static const std::set<std::string> allowed = {"type", "minus", "plus", "u_domain", "viscosity",
                                                  "A", "B0", "bands", "center", "delta0", "M"};
    for (const auto& [k, v] : spec.items())
        if (!allowed.count(k)) throw ModelError("model_spec: unknown key '" + k + "'");
    const std::string type = spec.value("type", "");
    LoadedModel out;
    try {
        if (type == "scalar") {
            const auto dom = spec.at("u_domain").get<std::vector<double>>();
            if (dom.size() != 2 || !(dom[0] < dom[1])) throw ModelError("model_spec.u_domain must be [lo, hi] with lo < hi");
            ScalarModelOptions opts;
            if (spec.contains("viscosity")) {
                const double b = spec.at("viscosity").get<double>();
                if (!(b > 0)) throw ModelError("model_spec.viscosity must be positive");
                opts.B0 = [b](double, double) { return b; };
            }
            out.s = build_scalar_model(half_model(spec, "minus"), half_model(spec, "plus"), {dom[0], dom[1]}, opts);
            out.name = "user-scalar";
            out.scalar = true;
        } else if (type == "linear-system") {
            const json& a = spec.at("A");
            const int N = static_cast<int>(a.size());
            if (N < 1) throw ModelError("model_spec.A must be a nonempty square matrix");
            const Eigen::MatrixXd A = matrix_from(a, N, "model_spec.A");
            const Eigen::MatrixXd B0 =
                spec.contains("B0") ? matrix_from(spec.at("B0"), N, "model_spec.B0") : Eigen::MatrixXd::Identity(N, N);
            Eigen::VectorXd center = Eigen::VectorXd::Zero(N);
            if (spec.contains("center")) {
                const auto c = spec.at("center").get<std::vector<double>>();
                if (static_cast<int>(c.size()) != N) throw ModelError("model_spec.center must have N entries");
                for (int i = 0; i < N; ++i) center(i) = c[static_cast<std::size_t>(i)];
            }
            SystemModelOptions opts;
            opts.delta0 = spec.value("delta0", 1.0);
            opts.M = spec.value("M", 0.0);
            if (spec.contains("bands")) {
                const json& b = spec.at("bands");
                if (!b.is_array() || static_cast<int>(b.size()) != N)
                    throw ModelError("model_spec.bands must list one [low, high] pair per family");
                for (const auto& band : b) {
                    const auto lh = band.get<std::vector<double>>();
                    if (lh.size() != 2 || lh[0] > lh[1]) throw ModelError("model_spec.bands entries must be [low, high]");
                    opts.lam_low.push_back(lh[0]);
                    opts.lam_high.push_back(lh[1]);
                }
            }
            MatrixField A0 = [N](const Eigen::VectorXd&, double) { return Eigen::MatrixXd::Identity(N, N); };
            MatrixField A1 = [A](const Eigen::VectorXd&, double) { return A; };
            MatrixField Bf = [B0](const Eigen::VectorXd&, double) { return B0; };
            out.sys = finalize_system_model(N, A0, A1, Bf, center, opts);
            out.sys.name = "user-linear-system";
            out.name = out.sys.name;
            out.scalar = false;
        } else {
            throw ModelError("model_spec.type must be \"scalar\" or \"linear-system\"");
        }
    } catch (const json::exception& e) {
        throw ModelError(std::string("model_spec: ") + e.what());
    }
    return out;
}

LoadedModel load_model(const RunConfig& cfg) {
    if (!cfg.model_spec.is_null()) return load_user_model(cfg.model_spec);
    LoadedModel out;
    out.name = cfg.model;
    if (cfg.model == "p-system") {
        out.scalar = false;
        out.sys = p_system_preset();
    } else {
        out.s = scalar_preset(cfg.model);
    }
    return out;
}

SystemCouplingModel system_view(const LoadedModel& m) {
    if (!m.scalar) return m.sys;
    return scalar_as_system(m.s, 0.5 * (m.s.u_domain.lo + m.s.u_domain.hi));
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json check_json(const HypothesisCheck& c) {
    return {{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"passed", c.passed}, {"detail", c.detail}};
}

json report_json(const ValidationReport& rep) {
    json out = json::array();
    for (const auto& c : rep.checks) out.push_back(check_json(c));
    return out;
}

ScalarSolveConfig scalar_config(const RunConfig& cfg, double eps) {
    ScalarSolveConfig sc;
    sc.eps = eps;
    sc.p = cfg.p;
    sc.M = cfg.M;
    sc.grid_size = cfg.grid;
    sc.fix_tol = cfg.fix_tol;
    sc.max_iters = cfg.max_iters;
    if (cfg.relaxation > 0) sc.relaxation = cfg.relaxation;
    return sc;
}

SystemSolveConfig system_config(const RunConfig& cfg, double eps) {
    SystemSolveConfig sc;
    sc.eps = eps;
    sc.p = cfg.p;
    sc.M = cfg.M;
    sc.grid_size = cfg.grid;
    sc.outer_tol = cfg.fix_tol;
    sc.max_outer = cfg.max_iters;
    if (cfg.relaxation > 0) sc.relaxation = cfg.relaxation;
    return sc;
}

double scalar_datum(const std::vector<double>& v, const char* key) {
    if (v.size() != 1) throw ConfigError(std::string("'") + key + "' must hold one value for a scalar model");
    return v.front();
}

std::string scalar_solution_csv(const ScalarSolution& sol) {
    CsvBuilder csv({"xi", "u", "v", "h"});
    for (std::size_t k = 0; k < sol.u.size(); ++k)
        csv.row({sol.u.grid.x(k), sol.u[k], sol.v[k], sol.h.size() == sol.u.size() ? sol.h[k] : 0.0});
    return csv.str();
}

json weak_json(const WeakResidualReport& w) {
    json entropy = json::array();
    for (const auto& e : w.entropy_residuals)
        entropy.push_back({{"side", side_name(e.side)}, {"k", e.k}, {"value", e.value}});
    return {{"test_functions", w.test_functions},
            {"conservation_residual_minus", w.conservation_residual_minus},
            {"conservation_residual_plus", w.conservation_residual_plus},
            {"max_entropy_residual", w.max_entropy_residual},
            {"entropy_residuals", entropy}};
}

json base_diagnostics(const RunConfig& cfg, const LoadedModel& m) {
    return {{"schema_version", kSchemaVersion}, {"command", cfg.command}, {"model", m.name}};
}

int cmd_solve_scalar(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    if (!m.scalar) throw ConfigError("solve-scalar needs a scalar model; use solve-system for " + m.name);
    const double uL = scalar_datum(cfg.uL, "uL"), uR = scalar_datum(cfg.uR, "uR");
    const ScalarSolveConfig sc = resolve_config(m.s, scalar_config(cfg, cfg.eps));
    const ScalarSolution sol = solve_scalar(m.s, sc, uL, uR);
    out.write("solution.csv", scalar_solution_csv(sol));

    const double jump = std::abs(uR - uL);
    const bool tv_ok = sol.tv_u <= jump + 1e-6;
    const TraceWindowReport tw = trace_window_check(sol, m.s, uL, uR);
    json d = base_diagnostics(cfg, m);
    d["eps"] = sc.eps;
    d["p"] = sc.p;
    d["M"] = sc.M;
    d["grid_size"] = sc.grid_size;
    d["iterations"] = sol.iterations;
    d["residual"] = sol.residual;
    d["tv_u"] = sol.tv_u;
    d["jump"] = jump;
    d["tv_bound_ok"] = tv_ok;
    d["monotone"] = sol.monotone;
    d["alpha"] = sol.alpha;
    d["trace_window"] = {{"window_start", tw.window_start},
                         {"left_deviation", tw.left_deviation},
                         {"right_deviation", tw.right_deviation}};
    d["weak_residuals"] = weak_json(weak_residual_report(sol, m.s, uL, uR));
    d["strict_checks"] = {{"tv_bound", tv_ok}, {"monotone", sol.monotone}};
    out.write_json("diagnostics.json", d);
    return (cfg.strict && !(tv_ok && sol.monotone)) ? kExitStrict : kExitSuccess;
}

std::string system_solution_csv(const SystemSolveState& st) {
    const int N = st.u.components();
    std::vector<std::string> header{"xi"};
    for (int i = 0; i < N; ++i) header.push_back("u_" + std::to_string(i + 1));
    header.push_back("v");
    for (int i = 0; i < N; ++i) header.push_back("a_" + std::to_string(i + 1));
    CsvBuilder csv(header);
    for (std::size_t k = 0; k < st.u.grid.n; ++k) {
        std::vector<double> row{st.u.grid.x(k)};
        for (int i = 0; i < N; ++i) row.push_back(st.u.values(static_cast<Eigen::Index>(k), i));
        row.push_back(st.v[k]);
        for (int i = 0; i < N; ++i)
            row.push_back(static_cast<std::size_t>(i) < st.a.size() ? st.a[static_cast<std::size_t>(i)][k] : 0.0);
        csv.row(row);
    }
    return csv.str();
}

json system_json(const SystemSolveState& st, double jump) {
    const double corr = st.correction_contractions.empty()
                            ? 0.0
                            : *std::max_element(st.correction_contractions.begin(), st.correction_contractions.end());
    const double strength = st.strength_contractions.empty()
                                ? 0.0
                                : *std::max_element(st.strength_contractions.begin(), st.strength_contractions.end());
    return {{"eps", st.eps},
            {"p", st.p},
            {"M", st.u.grid.M},
            {"grid_size", st.u.grid.n},
            {"tau", vector_json(st.tau)},
            {"weighted_norm_theta", st.weighted_norm_theta},
            {"correction_alpha", corr},
            {"strength_alpha", strength},
            {"max_envelope_ratio", st.max_envelope_ratio},
            {"tv", st.tv},
            {"jump", jump},
            {"K", jump > 0 ? st.tv / jump : 0.0},
            {"sup_eps_u_xi", st.sup_eps_u_xi},
            {"boundary_residual", st.boundary_residual},
            {"decomposition_residual", st.decomposition_residual},
            {"ode_residual", st.ode_residual},
            {"outer_iterations", st.outer_iterations},
            {"outer_history", st.outer_history},
            {"constants",
             {{"A", st.A}, {"delta", st.delta}, {"r", st.r}, {"varsigma", st.varsigma}, {"beta", st.beta},
              {"A0_norm", st.A0_norm}, {"R", st.R}, {"nu", st.nu}, {"eta", st.eta}}}};
}

bool system_strict_ok(const SystemSolveState& st) {
    bool ok = st.boundary_residual <= 1e-6 && st.max_envelope_ratio <= 1.0;
    for (double a : st.correction_contractions) ok = ok && a < 1.0;
    for (double a : st.strength_contractions) ok = ok && a < 1.0;
    return ok;
}

void check_data_size(const RunConfig& cfg, int N) {
    if (static_cast<int>(cfg.uL.size()) != N || static_cast<int>(cfg.uR.size()) != N)
        throw ConfigError("'uL' and 'uR' must each hold " + std::to_string(N) + " values for this model");
}

int cmd_solve_system(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    const SystemCouplingModel sys = system_view(m);
    check_data_size(cfg, sys.N);
    const Eigen::VectorXd uL = to_vector(cfg.uL), uR = to_vector(cfg.uR);
    const SystemSolveState st = solve_system(sys, system_config(cfg, cfg.eps), uL, uR);
    out.write("solution.csv", system_solution_csv(st));
    json d = base_diagnostics(cfg, m);
    d.update(system_json(st, (uR - uL).norm()));
    const bool ok = system_strict_ok(st);
    d["strict_checks"] = {{"uniform_estimates", ok}};
    out.write_json("diagnostics.json", d);
    return (cfg.strict && !ok) ? kExitStrict : kExitSuccess;
}

Eigen::VectorXd sample_ball(const SystemCouplingModel& sys, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (;;) {
        Eigen::VectorXd z(sys.N);
        for (int i = 0; i < sys.N; ++i) z(i) = unit(rng);
        if (z.norm() <= 1.0) return sys.center + sys.delta0 * z;
    }
}

int cmd_spectral_sweep(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    const SystemCouplingModel sys = system_view(m);
    const int N = sys.N;
    const double M = cfg.M > 0 ? cfg.M : sys.M;

    std::vector<std::string> header{"v", "xi"};
    for (const char* name : {"mu", "lambda_hat", "d"})
        for (int i = 0; i < N; ++i) header.push_back(std::string(name) + "_" + std::to_string(i + 1));
    CsvBuilder sweep(header);
    const int n = std::max(2, cfg.samples);
    for (double v : {-1.0, 0.0, 1.0}) {
        const SpectralData* prev = nullptr;
        SpectralData last;
        for (int k = 0; k < n; ++k) {
            const double xi = -M + 2.0 * M * k / (n - 1);
            SpectralData s = solve_generalized_eigen(sys, sys.center, v, xi, prev);
            std::vector<double> row{v, xi};
            for (int i = 0; i < N; ++i) row.push_back(s.mu(i));
            for (int i = 0; i < N; ++i) row.push_back(s.lambda_hat(i));
            for (int i = 0; i < N; ++i) row.push_back(s.d(i));
            sweep.row(row);
            last = std::move(s);
            prev = &last;
        }
    }
    out.write("sweep.csv", sweep.str());

    std::vector<std::string> sh{"sample"};
    for (int i = 0; i < N; ++i) sh.push_back("u_" + std::to_string(i + 1));
    sh.insert(sh.end(), {"v", "xi", "residual", "biorthogonality", "condition", "identity_b_mismatch"});
    CsvBuilder samples(sh);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double max_res = 0, max_bi = 0, max_cond = 0, max_mismatch = 0;
    int defective = 0, identity_samples = 0;
    for (int k = 0; k < cfg.samples; ++k) {
        const Eigen::VectorXd u = sample_ball(sys, rng);
        const double v = unit(rng);
        const double xi = M * unit(rng);
        const SpectralData s = solve_generalized_eigen(sys, u, v, xi);
        double mismatch = std::nan("");
        const Eigen::MatrixXd B = sys.B(u, v);
        if ((B - Eigen::MatrixXd::Identity(N, N)).norm() < 1e-14) {
            const SpectralData h = hyperbolic_eigen(sys.A(u, v));
            mismatch = 0;
            for (int i = 0; i < N; ++i) mismatch = std::max(mismatch, std::abs(s.mu(i) - (h.lambda_hat(i) - xi)));
            max_mismatch = std::max(max_mismatch, mismatch);
            ++identity_samples;
        }
        std::vector<double> row{static_cast<double>(k)};
        for (int i = 0; i < N; ++i) row.push_back(u(i));
        row.insert(row.end(), {v, xi, s.residual, s.biorthogonality, s.condition, mismatch});
        samples.row(row);
        max_res = std::max(max_res, s.residual);
        max_bi = std::max(max_bi, s.biorthogonality);
        max_cond = std::max(max_cond, s.condition);
        defective += s.near_defective ? 1 : 0;
    }
    out.write("samples.csv", samples.str());

    json d = base_diagnostics(cfg, m);
    d["samples"] = cfg.samples;
    d["seed"] = cfg.seed;
    d["M"] = M;
    d["max_residual"] = max_res;
    d["max_biorthogonality"] = max_bi;
    d["max_condition"] = max_cond;
    d["near_defective"] = defective;
    d["identity_b_samples"] = identity_samples;
    d["max_identity_b_mismatch"] = max_mismatch;
    const bool ok = max_res <= 1e-9 && max_bi <= 1e-9 && max_mismatch <= 1e-10;
    d["strict_checks"] = {{"eigen_consistency", ok}};
    out.write_json("diagnostics.json", d);
    return (cfg.strict && !ok) ? kExitStrict : kExitSuccess;
}

// Checks whose failure invalidates the construction; the rest are reported.
bool is_structural_check(const std::string& name) {
    return name == "A0 invertible" || name == "hyperbolicity" || name == "eigenvalues within bands" ||
           name == "bands separated" || name == "A0 positive" || name == "B0 lower bound";
}

LadderPoint frozen_ladder_point(const SystemCouplingModel& sys, double eps, double p, double M_cfg, std::size_t grid,
                                std::vector<double>& d_min) {
    const double M = M_cfg > 0 ? M_cfg : sys.M;
    const std::size_t n = grid > 0 ? grid : std::max<std::size_t>(512, static_cast<std::size_t>(std::ceil(40.0 * M / eps)));
    const Grid g(M, n);
    const ColorProfile profile(eps, p, M);
    const GridFunction v = sample_v(profile, g);
    std::vector<GridFunction> mu(static_cast<std::size_t>(sys.N), GridFunction(g));
    const SpectralData* prev = nullptr;
    SpectralData last;
    for (std::size_t k = 0; k < g.n; ++k) {
        SpectralData s = solve_generalized_eigen(sys, sys.center, v[k], g.x(k), prev);
        for (int i = 0; i < sys.N; ++i) {
            mu[static_cast<std::size_t>(i)][k] = s.mu(i);
            d_min[static_cast<std::size_t>(i)] = std::min(d_min[static_cast<std::size_t>(i)], s.d(i));
        }
        last = std::move(s);
        prev = &last;
    }
    return {build_phi_star(mu, eps), sample_psi(profile, g)};
}

int cmd_verify_lemmas(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    json d = base_diagnostics(cfg, m);
    std::vector<const HypothesisCheck*> structural_failures;
    ValidationReport scalar_rep, system_rep;
    if (m.scalar) {
        scalar_rep = validate_hypotheses(m.s);
        d["scalar_hypotheses"] = report_json(scalar_rep);
    }
    const SystemCouplingModel sys = system_view(m);
    system_rep = validate_hypotheses(sys);
    d["system_hypotheses"] = report_json(system_rep);
    for (const auto* rep : {&scalar_rep, &system_rep})
        for (const auto& c : rep->checks)
            if (!c.passed && is_structural_check(c.name)) structural_failures.push_back(&c);
    if (!structural_failures.empty()) {
        json failed = json::array();
        std::string message = "model hypotheses failed:";
        for (const auto* c : structural_failures) {
            failed.push_back(check_json(*c));
            message += " " + c->name + " (" + c->detail + ");";
        }
        out.write_json("lemmas.json", d);
        throw RunFailure(message, {{"kind", "hypothesis"}, {"checks", failed}});
    }

    std::vector<double> d_min(static_cast<std::size_t>(sys.N), std::numeric_limits<double>::infinity());
    std::vector<LadderPoint> ladder;
    for (double eps : cfg.eps_ladder) ladder.push_back(frozen_ladder_point(sys, eps, cfg.p, cfg.M, cfg.grid, d_min));
    BandInfo bands{sys.lam_low, sys.lam_high, d_min};
    const BoundsReport rep = verify_bounds(ladder, bands);

    json bounds = json::array();
    std::ostringstream rows;
    rows << "bound,eps,value\n";
    for (std::size_t b = 0; b < rep.bounds.size(); ++b) {
        const auto& fb = rep.bounds[b];
        bounds.push_back({{"name", fb.name}, {"per_eps", fb.per_eps}, {"fitted", fb.fitted}, {"passed", fb.passed},
                          {"verdict", fb.verdict}});
        for (std::size_t k = 0; k < fb.per_eps.size() && k < rep.eps.size(); ++k)
            rows << '"' << fb.name << "\"," << format_double(rep.eps[k]) << "," << format_double(fb.per_eps[k]) << "\n";
    }
    out.write("bounds.csv", rows.str());
    d["eps_ladder"] = rep.eps;
    d["bounds"] = bounds;
    d["d_min"] = d_min;
    bool hypotheses_ok = system_rep.all_passed() && (!m.scalar || scalar_rep.all_passed());
    d["all_hypotheses_passed"] = hypotheses_ok;
    d["all_bounds_passed"] = rep.all_passed();
    d["strict_checks"] = {{"hypotheses", hypotheses_ok}, {"bounds", rep.all_passed()}};
    out.write_json("lemmas.json", d);
    return (cfg.strict && !(hypotheses_ok && rep.all_passed())) ? kExitStrict : kExitSuccess;
}

std::string ladder_file(std::size_t k) {
    std::ostringstream os;
    os << "solution_" << std::setw(2) << std::setfill('0') << k << ".csv";
    return os.str();
}

int scalar_continuation(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out, ContinuationReport* keep) {
    const double uL = scalar_datum(cfg.uL, "uL"), uR = scalar_datum(cfg.uR, "uR");
    ContinuationReport rep = epsilon_continuation(m.s, scalar_config(cfg, cfg.eps_ladder.front()), uL, uR, cfg.eps_ladder);
    CsvBuilder csv({"index", "eps", "tv", "l1_to_previous"});
    for (std::size_t k = 0; k < rep.solutions.size(); ++k) {
        out.write(ladder_file(k), scalar_solution_csv(rep.solutions[k]));
        csv.row({static_cast<double>(k), rep.eps[k], rep.tv[k], k > 0 ? rep.l1_distances[k - 1] : 0.0});
    }
    out.write("continuation.csv", csv.str());
    json d = base_diagnostics(cfg, m);
    json files = json::array();
    for (std::size_t k = 0; k < rep.solutions.size(); ++k) files.push_back(ladder_file(k));
    d["eps_ladder"] = cfg.eps_ladder;
    d["solution_files"] = files;
    d["tv"] = rep.tv;
    d["l1_distances"] = rep.l1_distances;
    d["distances_decreasing"] = rep.distances_decreasing;
    d["pointwise_cauchy"] = rep.pointwise_cauchy;
    d["tv_bounded"] = rep.tv_bounded;
    d["failures"] = rep.failures;
    d["verdict"] = rep.verdict;
    d["strict_checks"] = {{"tv_bound", rep.tv_bounded}};
    out.write_json("diagnostics.json", d);
    if (!rep.failures.empty()) throw RunFailure("continuation stopped: " + rep.failures.front(), {{"kind", "stage"}, {"failures", rep.failures}});
    const int code = (cfg.strict && !rep.tv_bounded) ? kExitStrict : kExitSuccess;
    if (keep) *keep = std::move(rep);
    return code;
}

int system_continuation(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    const SystemCouplingModel sys = system_view(m);
    check_data_size(cfg, sys.N);
    const Eigen::VectorXd uL = to_vector(cfg.uL), uR = to_vector(cfg.uR);
    const double jump = (uR - uL).norm();
    CsvBuilder csv({"index", "eps", "tv", "K", "sup_eps_u_xi", "l1_to_previous"});
    json per_eps = json::array();
    std::vector<double> ratios;
    std::optional<SystemSolveState> prev;
    for (std::size_t k = 0; k < cfg.eps_ladder.size(); ++k) {
        const SystemSolveState st = solve_system(sys, system_config(cfg, cfg.eps_ladder[k]), uL, uR);
        out.write(ladder_file(k), system_solution_csv(st));
        double l1 = 0;
        if (prev)
            for (int i = 0; i < sys.N; ++i) l1 += l1_distance(st.u.component(i), prev->u.component(i));
        const double K = jump > 0 ? st.tv / jump : 0.0;
        ratios.push_back(K);
        csv.row({static_cast<double>(k), cfg.eps_ladder[k], st.tv, K, st.sup_eps_u_xi, l1});
        json j = system_json(st, jump);
        j["l1_to_previous"] = l1;
        j["strict_ok"] = system_strict_ok(st);
        per_eps.push_back(j);
        prev = st;
    }
    out.write("continuation.csv", csv.str());
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double variation = *lo > 0 ? (*hi - *lo) / *lo : 0.0;
    bool ok = variation < 0.15;
    for (const auto& j : per_eps) ok = ok && j.at("strict_ok").get<bool>();
    json d = base_diagnostics(cfg, m);
    d["eps_ladder"] = cfg.eps_ladder;
    d["per_eps"] = per_eps;
    d["tv_ratio_variation"] = variation;
    d["strict_checks"] = {{"uniform_estimates", ok}};
    out.write_json("diagnostics.json", d);
    return (cfg.strict && !ok) ? kExitStrict : kExitSuccess;
}

int cmd_continuation(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    return m.scalar ? scalar_continuation(cfg, m, out, nullptr) : system_continuation(cfg, m, out);
}

int cmd_trace_report(const RunConfig& cfg, const LoadedModel& m, OutputWriter& out) {
    if (!m.scalar) throw ConfigError("trace-report needs a scalar model");
    ContinuationReport rep;
    int code = scalar_continuation(cfg, m, out, &rep);
    const TraceReport tr = interface_trace_report(rep.solutions, m.s);
    CsvBuilder csv({"eps", "left_trace", "right_trace"});
    for (std::size_t k = 0; k < tr.eps.size(); ++k) csv.row({tr.eps[k], tr.left[k], tr.right[k]});
    out.write("trace.csv", csv.str());
    json d = base_diagnostics(cfg, m);
    d["eps_ladder"] = tr.eps;
    d["left"] = tr.left;
    d["right"] = tr.right;
    d["left_limit"] = tr.left_limit;
    d["right_limit"] = tr.right_limit;
    d["gap"] = tr.gap;
    d["agree"] = tr.agree;
    d["weak_condition_checked"] = tr.weak_condition_checked;
    d["weak_condition_ok"] = tr.weak_condition_ok;
    d["left_set_distance"] = tr.left_set_distance;
    d["right_set_distance"] = tr.right_set_distance;
    d["verdict"] = tr.verdict;
    const bool ok = !tr.weak_condition_checked || tr.weak_condition_ok;
    d["strict_checks"] = {{"weak_coupling", ok}};
    out.write_json("trace.json", d);
    if (cfg.strict && !ok) code = kExitStrict;
    return code;
}

json versions_json() {
    std::ostringstream eigen, nl;
    eigen << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
    nl << NLOHMANN_JSON_VERSION_MAJOR << "." << NLOHMANN_JSON_VERSION_MINOR << "." << NLOHMANN_JSON_VERSION_PATCH;
    return {{"dafermos", DAFERMOS_VERSION},
            {"eigen", eigen.str()},
            {"nlohmann_json", nl.str()},
            {"openssl", OpenSSL_version(OPENSSL_VERSION)},
            {"compiler", __VERSION__}};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"solve-scalar", "solve-system", "spectral-sweep",
                                                   "verify-lemmas", "continuation", "trace-report"};
    return names;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, type] : key_types()) k.push_back(name);
        return k;
    }();
    return keys;
}

json to_json(const RunConfig& c) {
    json j = {{"command", c.command}, {"p", c.p},           {"fix_tol", c.fix_tol}, {"max_iters", c.max_iters},
              {"out", c.out},         {"strict", c.strict}, {"seed", c.seed}};
    if (c.model_spec.is_null())
        j["model"] = c.model;
    else
        j["model_spec"] = c.model_spec;
    if (is_ladder_command(c.command))
        j["eps_ladder"] = c.eps_ladder;
    else
        j["eps"] = c.eps;
    if (c.M > 0) j["M"] = c.M;
    if (c.grid > 0) j["grid"] = c.grid;
    if (c.relaxation > 0) j["relaxation"] = c.relaxation;
    if (!c.uL.empty()) j["uL"] = c.uL;
    if (!c.uR.empty()) j["uR"] = c.uR;
    if (c.command == "spectral-sweep") j["samples"] = c.samples;
    return j;
}

RunConfig parse_config(const std::optional<std::string>& path, const json& flags) {
    Sources src;
    json file = json::object();
    if (path) {
        src.path = *path;
        src.text = read_file(*path);
        file = parse_json_text(src.text, *path);
        if (!file.is_object()) throw ConfigError(*path + ": the config must be a JSON object");
        for (const auto& [k, v] : file.items())
            if (k != kProvenanceKey && !key_types().count(k))
                throw ConfigError("unknown key '" + k + "' at line " + std::to_string(line_of_key(src.text, k)) +
                                  " of " + *path);
        file.erase(kProvenanceKey);
    }
    json merged = file;
    json overrides = json::object();
    for (const auto& [k, v] : flags.items()) {
        if (!key_types().count(k)) throw ConfigError("unknown flag " + flag_name(k));
        if (file.contains(k) && file.at(k) != v) overrides[k] = {{"file", file.at(k)}, {"flag", v}};
        merged[k] = v;
        src.from_flag.insert(k);
    }

    auto conflict = [&](const std::string& a, const std::string& b) {
        if (merged.contains(a) && merged.contains(b))
            throw ConfigError("conflicting keys '" + a + "' (" + src.pointer(a) + ") and '" + b + "' (" +
                              src.pointer(b) + "); give only one");
    };
    conflict("eps", "eps_ladder");
    conflict("model", "model_spec");

    RunConfig c;
    if (!merged.contains("command")) throw ConfigError("no command given");
    if (!merged.at("command").is_string()) throw ConfigError("'command' must be a string (" + src.pointer("command") + ")");
    c.command = merged.at("command").get<std::string>();
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), c.command) == names.end())
        throw ConfigError("unknown command '" + c.command + "' (" + src.pointer("command") + ")");

    if (merged.contains("model")) {
        if (!merged.at("model").is_string()) throw ConfigError("'model' must be a string (" + src.pointer("model") + ")");
        c.model = merged.at("model").get<std::string>();
        auto presets = scalar_preset_names();
        presets.push_back("p-system");
        if (std::find(presets.begin(), presets.end(), c.model) == presets.end()) {
            std::string list;
            for (const auto& p : presets) list += (list.empty() ? "" : ", ") + p;
            throw ConfigError("unknown model '" + c.model + "' (" + src.pointer("model") + "); presets: " + list);
        }
    } else if (merged.contains("model_spec")) {
        if (!merged.at("model_spec").is_object())
            throw ConfigError("'model_spec' must be an object (" + src.pointer("model_spec") + ")");
        c.model_spec = merged.at("model_spec");
    } else {
        throw ConfigError("a model is required: give 'model' (preset name) or 'model_spec'");
    }

    const bool ladder_cmd = is_ladder_command(c.command);
    if (ladder_cmd) {
        if (merged.contains("eps"))
            throw ConfigError("'eps' does not apply to " + c.command + "; use 'eps_ladder' (" + src.pointer("eps") + ")");
        c.eps_ladder = merged.contains("eps_ladder") ? get_list(merged, "eps_ladder", src) : default_ladder(c.command);
        for (double e : c.eps_ladder)
            if (!(e > 0) || !std::isfinite(e))
                throw ConfigError("ladder values must be positive (" + src.pointer("eps_ladder") + ")");
        for (std::size_t k = 1; k < c.eps_ladder.size(); ++k)
            if (!(c.eps_ladder[k] < c.eps_ladder[k - 1]))
                throw ConfigError("ladder must be strictly decreasing (" + src.pointer("eps_ladder") + ")");
    } else {
        if (merged.contains("eps_ladder"))
            throw ConfigError("'eps_ladder' does not apply to " + c.command + "; use 'eps' (" +
                              src.pointer("eps_ladder") + ")");
        if (merged.contains("eps")) c.eps = get_double(merged, "eps", src);
        require_positive(c.eps, "eps", src);
    }

    if (merged.contains("p")) c.p = get_double(merged, "p", src);
    require_positive(c.p, "p", src);
    if (merged.contains("M")) {
        c.M = get_double(merged, "M", src);
        require_positive(c.M, "M", src);
    }
    if (merged.contains("grid")) {
        const long long g = get_int(merged, "grid", src);
        if (g < 3) throw ConfigError("'grid' must be at least 3 (" + src.pointer("grid") + ")");
        c.grid = static_cast<std::size_t>(g);
    }
    if (merged.contains("fix_tol")) c.fix_tol = get_double(merged, "fix_tol", src);
    require_positive(c.fix_tol, "fix_tol", src);
    if (merged.contains("max_iters")) {
        const long long n = get_int(merged, "max_iters", src);
        if (n < 1 || n > 100000000) throw ConfigError("'max_iters' must be positive (" + src.pointer("max_iters") + ")");
        c.max_iters = static_cast<int>(n);
    }
    if (merged.contains("relaxation")) {
        c.relaxation = get_double(merged, "relaxation", src);
        if (!(c.relaxation > 0 && c.relaxation <= 1))
            throw ConfigError("'relaxation' must lie in (0, 1] (" + src.pointer("relaxation") + ")");
    }
    if (merged.contains("samples")) {
        const long long n = get_int(merged, "samples", src);
        if (n < 1 || n > 10000000) throw ConfigError("'samples' must be positive (" + src.pointer("samples") + ")");
        c.samples = static_cast<int>(n);
    }
    if (merged.contains("seed")) {
        const json& s = merged.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("'seed' must be a nonnegative integer (" + src.pointer("seed") + ")");
        c.seed = s.get<std::uint64_t>();
    }
    if (merged.contains("strict")) {
        if (!merged.at("strict").is_boolean()) throw ConfigError("'strict' must be true or false (" + src.pointer("strict") + ")");
        c.strict = merged.at("strict").get<bool>();
    }
    for (const char* key : {"uL", "uR"})
        if (merged.contains(key)) {
            auto v = get_list(merged, key, src);
            for (double x : v)
                if (!std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be finite (" + src.pointer(key) + ")");
            (std::string(key) == "uL" ? c.uL : c.uR) = std::move(v);
        }
    if (needs_data(c.command) && (c.uL.empty() || c.uR.empty()))
        throw ConfigError(c.command + " needs both 'uL' and 'uR' (flags --uL and --uR)");
    if (!c.uL.empty() && !c.uR.empty() && c.uL.size() != c.uR.size())
        throw ConfigError("'uL' and 'uR' must have the same length");

    if (merged.contains("out")) {
        if (!merged.at("out").is_string() || merged.at("out").get<std::string>().empty())
            throw ConfigError("'out' must be a nonempty path (" + src.pointer("out") + ")");
        c.out = merged.at("out").get<std::string>();
    } else {
        const char* root = std::getenv("DAFERMOS_OUTPUT_ROOT");
        c.out = (fs::path(root && *root ? root : "dafermos_out") / c.command).string();
    }

    json sources = json::object();
    const json effective = to_json(c);
    for (const auto& [k, v] : effective.items())
        sources[k] = src.from_flag.count(k) ? "flag" : (file.contains(k) ? "file" : "default");
    c.echo = effective;
    c.echo[kProvenanceKey] = {{"config_file", path ? json(*path) : json(nullptr)},
                              {"sources", sources},
                              {"overrides", overrides}};
    return c;
}

RunConfig parse_args(int argc, const char* const* argv) {
    CLI::App app{"Self-similar vanishing-viscosity Riemann solutions for coupled hyperbolic models"};
    app.name("dafermos");
    app.require_subcommand(1, 1);
    std::string config_path;
    std::map<std::string, std::string> raw;
    bool strict = false;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        for (const auto& [key, type] : key_types()) {
            if (key == "command" || key == "strict") continue;
            sub->add_option(flag_name(key), raw[key]);
        }
        sub->add_flag("--strict", strict, "Exit 2 when an acceptance check fails");
        subs[name] = sub;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen->count("--help")) throw HelpRequested(chosen->help());
    json flags = {{"command", chosen->get_name()}};
    for (const auto& [key, type] : key_types()) {
        if (key == "command" || key == "strict") continue;
        if (chosen->count(flag_name(key)) > 0) flags[key] = flag_value(key, raw[key]);
    }
    if (strict) flags["strict"] = true;
    std::optional<std::string> path;
    if (chosen->count("--config") > 0) path = config_path;
    return parse_config(path, flags);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 computation failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
    return os.str();
}

std::string inputs_hash(const RunConfig& config) {
    json j = to_json(config);
    j.erase("out");  // where results go is not an input
    return sha256_hex(j.dump());
}

int run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    OutputWriter out(cfg.out);
    out.write_json("config.json", cfg.echo.is_null() ? to_json(cfg) : cfg.echo);

    json manifest = {{"schema_version", kSchemaVersion},
                     {"command", cfg.command},
                     {"inputs_hash", inputs_hash(cfg)},
                     {"versions", versions_json()}};
    int code = kExitFailure;
    json error;
    try {
        const LoadedModel model = load_model(cfg);
        if (cfg.command == "solve-scalar")
            code = cmd_solve_scalar(cfg, model, out);
        else if (cfg.command == "solve-system")
            code = cmd_solve_system(cfg, model, out);
        else if (cfg.command == "spectral-sweep")
            code = cmd_spectral_sweep(cfg, model, out);
        else if (cfg.command == "verify-lemmas")
            code = cmd_verify_lemmas(cfg, model, out);
        else if (cfg.command == "continuation")
            code = cmd_continuation(cfg, model, out);
        else
            code = cmd_trace_report(cfg, model, out);
    } catch (const RunFailure& e) {
        error = e.detail;
        error["message"] = e.what();
    } catch (const SmallnessError& e) {
        error = {{"kind", "smallness"}, {"stage", e.stage},    {"component", e.component},
                 {"xi", e.xi},          {"history", e.history}, {"message", e.what()}};
    } catch (const ConvergenceError& e) {
        error = {{"kind", "convergence"}, {"history", e.residual_history}, {"message", e.what()}};
    } catch (const SolverError& e) {
        error = {{"kind", "solver"}, {"message", e.what()}};
    } catch (const ModelError& e) {
        error = {{"kind", "model"}, {"message", e.what()}};
    } catch (const ConfigError& e) {
        error = {{"kind", "config"}, {"message", e.what()}};
    } catch (const std::exception& e) {
        error = {{"kind", "runtime"}, {"message", e.what()}};
    }
    if (!error.is_null()) {
        code = kExitFailure;
        out.write_json("error.json", {{"schema_version", kSchemaVersion}, {"error", error}});
        std::cerr << "error: " << error.at("message").get<std::string>() << "\n";
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["status"] = code == kExitFailure ? "incomplete" : "complete";
    manifest["exit_code"] = code;
    manifest["wall_time_seconds"] = wall;
    manifest["files"] = out.files();
    out.write_json("manifest.json", manifest);
    return code;
}

}  // namespace dafermos::cli
