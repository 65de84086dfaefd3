#include "fracblow/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracblow/errors.hpp"

namespace fracblow {

std::string canonical_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ExperimentConfig::ExperimentConfig() {
    set("alpha", "0.5");
    set("dim", "2");
    set("nonlinearity", "power");
    set("p", "2.5");
    set("measure", "hausdorff");
    set("dirac.theta", "0");
    set("sum.hausdorff_weight", "1");
    set("sum.dirac_weight", "1");
    set("k", "1");
    set("k.max", "1024");
    set("k.factor", "2");
    set("grid.rho_min", "0.0001");
    set("grid.q", "1.35");
    set("grid.n_theta", "64");
    set("tol.solve", "1e-06");
    set("tol.quad", "1e-10");
    set("scan", "50");
    set("tau", "-0.5");
    set("seed", "42");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError,
                        "config line " + std::to_string(lineno) + " lacks '='");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw Error(ErrorCode::ConfigError,
                        "config line " + std::to_string(lineno) + " is malformed");
        cfg.set(key, value);
    }
    return cfg;
}

const std::string& ExperimentConfig::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw Error(ErrorCode::ConfigError, "missing config key: " + key);
    return it->second;
}

double ExperimentConfig::get_num(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "config key " + key + " is not numeric: " + s);
    }
}

long ExperimentConfig::get_int(const std::string& key) const {
    const double v = get_num(key);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
        throw Error(ErrorCode::ConfigError, "config key " + key + " is not an integer");
    return n;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
}

void ExperimentConfig::set_num(const std::string& key, double value) {
    kv_[key] = canonical_num(value);
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
    return out.str();
}

std::string ExperimentConfig::hash() const {
    const std::string s = serialize();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ExperimentConfig::validate() const {
    const double alpha = get_num("alpha");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::ConfigError, "alpha must lie in (0,1)");
    const long dim = get_int("dim");
    if (dim != 2 && dim != 3) throw Error(ErrorCode::ConfigError, "dim must be 2 or 3");
    const std::string& g = get("nonlinearity");
    if (g != "power" && g != "zero")
        throw Error(ErrorCode::ConfigError, "nonlinearity must be 'power' or 'zero'");
    if (g == "power" && !(get_num("p") > 0.0))
        throw Error(ErrorCode::ConfigError, "power exponent must be positive");
    const std::string& m = get("measure");
    if (m != "hausdorff" && m != "dirac" && m != "sum")
        throw Error(ErrorCode::ConfigError, "measure must be hausdorff, dirac, or sum");
    if (!(get_num("k") > 0.0)) throw Error(ErrorCode::ConfigError, "k must be positive");
    if (!(get_num("grid.rho_min") >= 1e-5))
        throw Error(ErrorCode::ConfigError, "grid.rho_min must be >= 1e-5");
    if (!(get_num("grid.q") > 1.0)) throw Error(ErrorCode::ConfigError, "grid.q must exceed 1");
    if (get_int("grid.n_theta") < 4)
        throw Error(ErrorCode::ConfigError, "grid.n_theta must be at least 4");
    if (!(get_num("tol.solve") > 0.0 && get_num("tol.quad") > 0.0))
        throw Error(ErrorCode::ConfigError, "tolerances must be positive");
}

} // namespace fracblow
