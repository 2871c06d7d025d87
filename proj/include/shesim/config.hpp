#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shesim/convergence.hpp"
#include "shesim/galerkin.hpp"
#include "shesim/integrators.hpp"
#include "shesim/stability.hpp"

// Declarative experiment configs: key = value lines grouped in [section]
// blocks, with dot-path overrides (--set mc.paths=5000) layered on top.

namespace shesim {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_ = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

class KeyValueFile {
  public:
    static KeyValueFile parse_string(const std::string& text) {
        KeyValueFile f;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("malformed section header '" + t + "'", lineno);
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty()) throw ConfigError("empty section name", lineno);
                f.sections_[section];
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected 'key = value', got '" + t + "'", lineno);
            if (section.empty())
                throw ConfigError("key before any [section] header", lineno);
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", lineno);
            f.sections_[section][key] = value;
        }
        return f;
    }

    static KeyValueFile parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    // "section.key=value"
    void apply_override(const std::string& dotted) {
        const std::size_t eq = dotted.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like section.key=value: '" + dotted + "'");
        const std::string path = detail::trim(dotted.substr(0, eq));
        const std::size_t dot = path.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
            throw ConfigError("override must look like section.key=value: '" + dotted + "'");
        sections_[path.substr(0, dot)][path.substr(dot + 1)] = detail::trim(dotted.substr(eq + 1));
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        const auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    void require_section(const std::string& section) const {
        if (!has_section(section))
            throw ConfigError("missing required section [" + section + "]");
    }

    std::string raw(const std::string& section, const std::string& key) const {
        const auto it = sections_.find(section);
        if (it == sections_.end())
            throw ConfigError("missing required section [" + section + "]");
        const auto kit = it->second.find(key);
        if (kit == it->second.end())
            throw ConfigError("missing required field " + section + "." + key);
        return kit->second;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(raw(section, key), section, key);
    }

    double get_double_or(const std::string& section, const std::string& key, double def) const {
        return has(section, key) ? get_double(section, key) : def;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        const std::string v = raw(section, key);
        try {
            std::size_t pos = 0;
            const long long out = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError("field " + section + "." + key + " is not an integer: '" + v + "'");
        }
    }

    long long get_int_or(const std::string& section, const std::string& key, long long def) const {
        return has(section, key) ? get_int(section, key) : def;
    }

    std::string get_str(const std::string& section, const std::string& key) const {
        return raw(section, key);
    }

    std::string get_str_or(const std::string& section, const std::string& key,
                           const std::string& def) const {
        return has(section, key) ? raw(section, key) : def;
    }

    bool get_bool_or(const std::string& section, const std::string& key, bool def) const {
        if (!has(section, key)) return def;
        const std::string v = raw(section, key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError("field " + section + "." + key + " is not a boolean: '" + v + "'");
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const std::string& item : split_list(raw(section, key)))
            out.push_back(parse_double(item, section, key));
        return out;
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key) const {
        std::vector<int> out;
        for (const std::string& item : split_list(raw(section, key))) {
            try {
                out.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw ConfigError("field " + section + "." + key +
                                  " contains a non-integer item: '" + item + "'");
            }
        }
        return out;
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    static std::vector<std::string> split_list(const std::string& v) {
        std::vector<std::string> items;
        std::string item;
        std::istringstream in(v);
        while (std::getline(in, item, ',')) {
            const std::string t = detail::trim(item);
            if (!t.empty()) items.push_back(t);
        }
        return items;
    }

    static double parse_double(const std::string& v, const std::string& section,
                               const std::string& key) {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError("field " + section + "." + key + " is not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Named initial conditions: poly-x-1mx, mode-<k>, or an explicit
// coefficient list.
struct InitialCondition {
    enum class Kind { PolyX1mX, Mode, Coefficients };
    Kind kind = Kind::PolyX1mX;
    int mode = 1;
    std::vector<double> coeffs;

    static InitialCondition parse(const std::string& text) {
        InitialCondition ic;
        const std::string t = detail::trim(text);
        if (t == "poly-x-1mx") {
            ic.kind = Kind::PolyX1mX;
            return ic;
        }
        if (t.rfind("mode-", 0) == 0) {
            ic.kind = Kind::Mode;
            try {
                ic.mode = std::stoi(t.substr(5));
            } catch (const std::exception&) {
                throw ConfigError("bad mode index in initial condition '" + t + "'");
            }
            if (ic.mode < 1) throw ConfigError("initial condition mode index must be >= 1");
            return ic;
        }
        // Otherwise a comma-separated coefficient list.
        ic.kind = Kind::Coefficients;
        std::istringstream in(t);
        std::string item;
        while (std::getline(in, item, ',')) {
            const std::string x = detail::trim(item);
            if (x.empty()) continue;
            try {
                ic.coeffs.push_back(std::stod(x));
            } catch (const std::exception&) {
                throw ConfigError("initial condition must be poly-x-1mx, mode-<k>, or a "
                                  "coefficient list; got '" +
                                  t + "'");
            }
        }
        if (ic.coeffs.empty())
            throw ConfigError("initial condition must be poly-x-1mx, mode-<k>, or a coefficient "
                              "list; got '" +
                              t + "'");
        return ic;
    }

    StateVector project(int n) const {
        switch (kind) {
            case Kind::PolyX1mX:
                return project_initial([](double x) { return x * (1.0 - x); }, n);
            case Kind::Mode: {
                StateVector u = StateVector::Zero(n);
                if (mode <= n) u(mode - 1) = 1.0;
                return u;
            }
            case Kind::Coefficients:
                return project_initial(coeffs, n);
        }
        return StateVector::Zero(n);
    }

    std::string describe() const {
        switch (kind) {
            case Kind::PolyX1mX: return "poly-x-1mx";
            case Kind::Mode: return "mode-" + std::to_string(mode);
            case Kind::Coefficients: {
                std::ostringstream s;
                s.precision(17);
                for (std::size_t i = 0; i < coeffs.size(); ++i)
                    s << (i ? "," : "") << coeffs[i];
                return s.str();
            }
        }
        return "";
    }
};

struct TimeConfig {
    double tau = 1e-3;
    int n_steps = 0;
    double horizon = 0.0;
    StepScheme scheme = StepScheme::ImplicitEuler;
};

struct McConfig {
    int paths = 1000;
    std::uint64_t seed = 0;
};

struct OutputConfig {
    std::filesystem::path directory = "out";
    bool csv = true, json = true, svg = false;
    bool trajectory = false;  // single-path state dump from cmd_simulate
};

inline CovarianceModel make_covariance(const KeyValueFile& cfg) {
    cfg.require_section("noise");
    const std::string model = cfg.get_str("noise", "model");
    if (model == "power-law")
        return CovarianceModel::power_law(cfg.get_double("noise", "exponent"),
                                          static_cast<int>(cfg.get_int("noise", "count")));
    if (model == "weights") return CovarianceModel::from_weights(
        cfg.get_double_list("noise", "weights"));
    if (model == "fbm-field")
        return CovarianceModel::fbm_field(cfg.get_double("noise", "hurst"),
                                          static_cast<int>(cfg.get_int_or("noise", "nodes", 256)));
    if (model == "fractional-gaussian")
        return CovarianceModel::fractional_gaussian(
            cfg.get_double("noise", "hurst"),
            static_cast<int>(cfg.get_int_or("noise", "nodes", 256)));
    throw ConfigError("unknown noise.model '" + model +
                      "' (expected power-law | weights | fbm-field | fractional-gaussian)");
}

inline SystemSpec make_system(const KeyValueFile& cfg) {
    cfg.require_section("system");
    SystemSpec s;
    s.n = static_cast<int>(cfg.get_int("system", "n"));
    s.m = static_cast<int>(cfg.get_int("system", "m"));
    s.beta0 = cfg.get_double("system", "beta0");
    s.beta1 = cfg.get_double("system", "beta1");
    s.drift_scale = cfg.get_double_or("system", "drift_scale", 1.0);
    s.covariance = make_covariance(cfg);
    s.validate();
    return s;
}

inline InitialCondition make_initial(const KeyValueFile& cfg) {
    return InitialCondition::parse(cfg.get_str_or("system", "initial", "poly-x-1mx"));
}

inline TimeConfig make_time(const KeyValueFile& cfg) {
    cfg.require_section("time");
    TimeConfig t;
    t.tau = cfg.get_double("time", "tau");
    if (!(t.tau > 0.0)) throw ConfigError("time.tau must be positive");
    const bool has_steps = cfg.has("time", "steps");
    const bool has_horizon = cfg.has("time", "horizon");
    if (has_steps == has_horizon)
        throw ConfigError("exactly one of time.steps and time.horizon must be given");
    if (has_steps) {
        t.n_steps = static_cast<int>(cfg.get_int("time", "steps"));
        t.horizon = t.n_steps * t.tau;
    } else {
        t.horizon = cfg.get_double("time", "horizon");
        t.n_steps = std::max(1, static_cast<int>(std::llround(t.horizon / t.tau)));
    }
    if (t.n_steps < 1) throw ConfigError("time.steps must be >= 1");
    try {
        t.scheme = parse_scheme(cfg.get_str_or("time", "scheme", "implicit"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("time.scheme: ") + e.what());
    }
    return t;
}

inline McConfig make_mc(const KeyValueFile& cfg) {
    cfg.require_section("mc");
    McConfig m;
    m.paths = static_cast<int>(cfg.get_int("mc", "paths"));
    if (m.paths < 1) throw ConfigError("mc.paths must be >= 1");
    m.seed = static_cast<std::uint64_t>(cfg.get_int("mc", "seed"));
    return m;
}

inline OutputConfig make_output(const KeyValueFile& cfg) {
    OutputConfig o;
    o.directory = cfg.get_str_or("output", "directory", "out");
    if (const char* env = std::getenv("SHESIM_OUTPUT_DIR"); env && *env) o.directory = env;
    if (cfg.has("output", "formats")) {
        o.csv = o.json = o.svg = false;
        std::istringstream in(cfg.get_str("output", "formats"));
        std::string item;
        while (std::getline(in, item, ',')) {
            const std::string f = detail::trim(item);
            if (f == "csv")
                o.csv = true;
            else if (f == "json")
                o.json = true;
            else if (f == "svg")
                o.svg = true;
            else if (!f.empty())
                throw ConfigError("unknown output format '" + f + "'");
        }
    }
    o.trajectory = cfg.get_bool_or("output", "trajectory", false);
    return o;
}

inline RegionOptions make_region(const KeyValueFile& cfg, const TimeConfig& t, const McConfig& mc,
                                 int threads) {
    cfg.require_section("region");
    RegionOptions r;
    r.beta1_min = cfg.get_double("region", "beta1_min");
    r.beta1_max = cfg.get_double("region", "beta1_max");
    r.beta1_count = static_cast<int>(cfg.get_int("region", "beta1_count"));
    r.beta0_min = cfg.get_double("region", "beta0_min");
    r.beta0_max = cfg.get_double("region", "beta0_max");
    r.beta0_count = static_cast<int>(cfg.get_int("region", "beta0_count"));
    r.tau = t.tau;
    r.scheme = t.scheme;
    const std::string cls = cfg.get_str_or("region", "classifier", "analytic");
    if (cls == "analytic")
        r.classifier = RegionClassifier::Analytic;
    else if (cls == "monte-carlo")
        r.classifier = RegionClassifier::MonteCarlo;
    else
        throw ConfigError("region.classifier must be analytic or monte-carlo, got '" + cls + "'");
    r.mc_paths = static_cast<int>(cfg.get_int_or("region", "paths", mc.paths));
    r.mc_horizon = cfg.get_double_or("region", "horizon", t.horizon);
    r.base_seed = mc.seed;
    r.threads = threads;
    return r;
}

inline ConvergenceConfig make_converge(const KeyValueFile& cfg, const SystemSpec& sys,
                                       const TimeConfig& t, const McConfig& mc, int threads) {
    cfg.require_section("converge");
    ConvergenceConfig c;
    c.n_ref = static_cast<int>(cfg.get_int("converge", "n_ref"));
    c.m_ref = static_cast<int>(cfg.get_int("converge", "m_ref"));
    for (int n : cfg.get_int_list("converge", "n_levels")) c.levels.emplace_back(n, c.m_ref);
    if (cfg.has("converge", "m_levels"))
        for (int m : cfg.get_int_list("converge", "m_levels")) c.levels.emplace_back(c.n_ref, m);
    c.beta0 = sys.beta0;
    c.beta1 = sys.beta1;
    c.tau = t.tau;
    c.horizon = t.horizon;
    c.paths = mc.paths;
    c.base_seed = mc.seed;
    c.threads = threads;
    return c;
}

}  // namespace shesim
