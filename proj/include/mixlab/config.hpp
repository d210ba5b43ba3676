#ifndef MIXLAB_CONFIG_HPP
#define MIXLAB_CONFIG_HPP

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mixlab/core.hpp"

namespace mixlab {

/** Flat dotted-key experiment configuration ("key = value" lines, '#'
    comments). The config file is the reproducibility unit: experiment, field,
    grids, nu list, data spec, seed, output directory, tolerance overrides.
    Documented keys are listed in the README. */
struct ExperimentConfig {
    std::map<std::string, std::string> kv;
    std::string source_path;

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& fallback = "") const {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (fallback.empty()) throw ConfigError("missing config key '" + key + "'");
            return fallback;
        }
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        return parse_double(key, it->second);
    }

    double require_double(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing config key '" + key + "'");
        return parse_double(key, it->second);
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            size_t pos = 0;
            long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
        }
    }

    std::vector<double> get_list(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing config key '" + key + "'");
        std::vector<double> vals;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.find_first_not_of(" \t") == std::string::npos) continue;
            vals.push_back(parse_double(key, tok));
        }
        if (vals.empty()) throw ConfigError("config key '" + key + "': empty list");
        return vals;
    }

private:
    static double parse_double(const std::string& key, const std::string& raw) {
        try {
            size_t pos = 0;
            double v = std::stod(raw, &pos);
            while (pos < raw.size() && std::isspace((unsigned char)raw[pos])) ++pos;
            if (pos != raw.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: '" + raw + "'");
        }
    }
};

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ExperimentConfig cfg;
    cfg.source_path = path;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        size_t b = s.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        cfg.kv[key] = val;
    }
    return cfg;
}

inline const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> names = {
        "period-table", "chart-validate", "mixing-decay",
        "dissipation-sweep", "thm-main-protocol", "envelope-scan"};
    return names;
}

/** Validates ranges and required keys before dispatch; throws ConfigError
    with a message naming the offending key. */
inline void validate_config(const ExperimentConfig& cfg) {
    std::string exp = cfg.get_str("experiment");
    bool known = false;
    for (const auto& e : known_experiments()) known = known || e == exp;
    if (!known) throw ConfigError("unknown experiment '" + exp + "'");

    std::string field = cfg.get_str("field", "cellular");
    if (field != "cellular" && field != "shear-cos" && field != "harmonic" &&
        field != "quartic-radial" && field.rfind("expr:", 0) != 0)
        throw ConfigError("invalid field spec '" + field + "'");

    long n = cfg.get_int("grid.n", 256);
    if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("grid.n must be a power of two >= 4");

    double h_lo = cfg.get_double("annulus.h_lo", 0.3);
    double h_hi = cfg.get_double("annulus.h_hi", 0.7);
    if (!(h_lo < h_hi)) throw ConfigError("annulus.h_lo must be below annulus.h_hi");

    if (cfg.has("nu.list"))
        for (double nu : cfg.get_list("nu.list"))
            if (!(nu > 0)) throw ConfigError("nu.list entries must be positive");

    if (cfg.get_double("time.end", 1.0) <= 0) throw ConfigError("time.end must be positive");
    if (cfg.get_int("time.samples", 16) < 2) throw ConfigError("time.samples must be >= 2");
    if (cfg.get_int("seed", 0) < 0) throw ConfigError("seed must be non-negative");
    if (cfg.get_int("workers", 1) < 1) throw ConfigError("workers must be >= 1");

    if (exp == "dissipation-sweep" && !cfg.has("nu.list"))
        throw ConfigError("dissipation-sweep requires nu.list");
    if (exp == "envelope-scan") {
        std::string regime = cfg.get_str("envelope.regime", "global");
        if (regime != "interior" && regime != "elliptic" && regime != "global")
            throw ConfigError("envelope.regime must be interior, elliptic, or global");
        double eps = cfg.get_double("envelope.eps", 0.05);
        if (!(eps > 0 && eps < 0.5)) throw ConfigError("envelope.eps must be in (0, 1/2)");
    }
}

} // namespace mixlab

#endif
