#pragma once

// Experiment configuration: flat key=value text with dotted prefixes.
//
//   grid.dim = 1
//   grid.points = 512
//   sweep.masses = 4, 8, 16, 32, 64
//
// Blank lines and lines starting with '#' are ignored. Unknown keys are errors.

#include "dkg/errors.hpp"
#include "dkg/grid.hpp"
#include "dkg/klein_gordon.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dkg::lab {

enum class Preset { gaussian, rough };
enum class FieldInit { consistent, preset, mismatched };

struct ExperimentConfig {
    int dim = 1;
    int points = 512;
    double length = 32.0;

    Couplings couplings{0.5, 0.5, 1.0};

    Preset preset = Preset::gaussian;
    double rough_sigma = 3.0;
    std::uint64_t seed = 1;
    double spinor_amplitude = 0.05;  ///< rough perturbation added to each spinor component
    double field_amplitude = 0.2;    ///< rough reduced fields Sbar_in, omegabar_in
    FieldInit field_init = FieldInit::consistent;

    std::vector<double> masses{4, 8, 16, 32, 64};
    double s = 3.0;
    double s_prime = 1.0;
    std::vector<double> extra_s_prime;  ///< further measurement exponents on the same runs

    double t_backward = 0.0;  ///< T_1
    double t_forward = 2.0;   ///< T_2
    double dt = 1.0 / 256.0;
    double sample_interval = 0.0;  ///< 0 means T_2 / 64

    double guard_tolerance = 0.05;
    int guard_max_halvings = 6;
    bool guard_enabled = true;

    int rank = 3;
    std::vector<double> occupations;  ///< empty means all ones

    TorusGrid grid() const { return TorusGrid(dim, points, length); }

    double interval() const {
        if (sample_interval > 0.0) return sample_interval;
        const double span = std::max(t_forward, t_backward);
        return span > 0.0 ? span / 64.0 : dt;
    }

    std::vector<double> all_s_prime() const {
        std::vector<double> v{s_prime};
        v.insert(v.end(), extra_s_prime.begin(), extra_s_prime.end());
        return v;
    }

    std::vector<double> manybody_occupations() const {
        if (!occupations.empty()) return occupations;
        return std::vector<double>(static_cast<std::size_t>(rank), 1.0);
    }

    void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        // fractions such as 1/256 are accepted for time steps
        if (const auto slash = v.find('/'); slash != std::string::npos) {
            const double num = std::stod(trim(v.substr(0, slash)));
            std::size_t used2 = 0;
            const std::string den_s = trim(v.substr(slash + 1));
            const double den = std::stod(den_s, &used2);
            if (used2 != den_s.size() || den == 0.0) throw std::invalid_argument("bad fraction");
            return num / den;
        }
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<int>(d);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false");
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
    try {
        (void)grid();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    if (!(couplings.gamma_sigma >= 0.0) || !(couplings.gamma_omega >= 0.0))
        throw ConfigError("couplings must be nonnegative");
    if (!(couplings.fermion_mass > 0.0)) throw ConfigError("fermion mass must be positive");
    if (!(s > 2.5)) throw ConfigError("s must exceed 5/2");
    for (double sp : all_s_prime())
        if (!(sp >= 0.0) || sp > s) throw ConfigError("measurement exponents must lie in [0, s]");
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] >= 1.0)) throw ConfigError("masses must be >= 1");
        if (i > 0 && !(masses[i] > masses[i - 1])) throw ConfigError("masses must be strictly increasing");
    }
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_forward >= 0.0) || !(t_backward >= 0.0)) throw ConfigError("time horizons must be nonnegative");
    auto integral = [](double a, double b) {
        const double r = a / b;
        return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
    };
    if (!integral(interval(), dt)) throw ConfigError("sample interval must be a multiple of dt");
    if (!integral(t_forward, interval()) || !integral(t_backward, interval()))
        throw ConfigError("time horizons must be multiples of the sample interval");
    if (!(rough_sigma > 0.0)) throw ConfigError("rough regularity must be positive");
    if (!(guard_tolerance > 0.0) || guard_max_halvings < 0) throw ConfigError("bad dt guard settings");
    if (rank < 1) throw ConfigError("rank must be at least 1");
    if (!occupations.empty()) {
        if (occupations.size() != static_cast<std::size_t>(rank)) throw ConfigError("need one occupation per orbital");
        for (double n : occupations)
            if (!(n >= 0.0)) throw ConfigError("occupations must be nonnegative");
    }
}

/// Apply one key=value assignment.
inline void set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    const std::map<std::string, std::function<void(const std::string&)>> setters{
        {"grid.dim", [&](const std::string& v) { c.dim = parse_int(key, v); }},
        {"grid.points", [&](const std::string& v) { c.points = parse_int(key, v); }},
        {"grid.length", [&](const std::string& v) { c.length = parse_double(key, v); }},
        {"couplings.gamma_sigma", [&](const std::string& v) { c.couplings.gamma_sigma = parse_double(key, v); }},
        {"couplings.gamma_omega", [&](const std::string& v) { c.couplings.gamma_omega = parse_double(key, v); }},
        {"couplings.fermion_mass", [&](const std::string& v) { c.couplings.fermion_mass = parse_double(key, v); }},
        {"initial.preset",
         [&](const std::string& v) {
             if (v == "gaussian") c.preset = Preset::gaussian;
             else if (v == "rough") c.preset = Preset::rough;
             else throw ConfigError("initial.preset must be gaussian or rough");
         }},
        {"initial.sigma", [&](const std::string& v) { c.rough_sigma = parse_double(key, v); }},
        {"initial.seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(key, v)); }},
        {"initial.spinor_amplitude", [&](const std::string& v) { c.spinor_amplitude = parse_double(key, v); }},
        {"initial.field_amplitude", [&](const std::string& v) { c.field_amplitude = parse_double(key, v); }},
        {"initial.fields",
         [&](const std::string& v) {
             if (v == "consistent") c.field_init = FieldInit::consistent;
             else if (v == "preset") c.field_init = FieldInit::preset;
             else if (v == "mismatched") c.field_init = FieldInit::mismatched;
             else throw ConfigError("initial.fields must be consistent, preset or mismatched");
         }},
        {"sweep.masses", [&](const std::string& v) { c.masses = parse_list(key, v); }},
        {"sweep.s", [&](const std::string& v) { c.s = parse_double(key, v); }},
        {"sweep.s_prime", [&](const std::string& v) { c.s_prime = parse_double(key, v); }},
        {"sweep.extra_s_prime", [&](const std::string& v) { c.extra_s_prime = parse_list(key, v); }},
        {"time.t_backward", [&](const std::string& v) { c.t_backward = parse_double(key, v); }},
        {"time.t_forward", [&](const std::string& v) { c.t_forward = parse_double(key, v); }},
        {"time.dt", [&](const std::string& v) { c.dt = parse_double(key, v); }},
        {"time.sample_interval", [&](const std::string& v) { c.sample_interval = parse_double(key, v); }},
        {"guard.tolerance", [&](const std::string& v) { c.guard_tolerance = parse_double(key, v); }},
        {"guard.max_halvings", [&](const std::string& v) { c.guard_max_halvings = parse_int(key, v); }},
        {"guard.enabled", [&](const std::string& v) { c.guard_enabled = parse_bool(key, v); }},
        {"manybody.rank", [&](const std::string& v) { c.rank = parse_int(key, v); }},
        {"manybody.occupations", [&](const std::string& v) { c.occupations = parse_list(key, v); }},
    };
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'");
    it->second(value);
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
    return out;
}

}  // namespace detail

/// Canonical key=value text; parsing it back yields the same configuration.
inline std::string to_text(const ExperimentConfig& c) {
    using detail::format_double;
    using detail::format_list;
    const char* preset = c.preset == Preset::rough ? "rough" : "gaussian";
    const char* fields = c.field_init == FieldInit::consistent ? "consistent"
                         : c.field_init == FieldInit::preset   ? "preset"
                                                               : "mismatched";
    std::string out;
    auto line = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    line("grid.dim", std::to_string(c.dim));
    line("grid.points", std::to_string(c.points));
    line("grid.length", format_double(c.length));
    line("couplings.gamma_sigma", format_double(c.couplings.gamma_sigma));
    line("couplings.gamma_omega", format_double(c.couplings.gamma_omega));
    line("couplings.fermion_mass", format_double(c.couplings.fermion_mass));
    line("initial.preset", preset);
    line("initial.sigma", format_double(c.rough_sigma));
    line("initial.seed", std::to_string(c.seed));
    line("initial.spinor_amplitude", format_double(c.spinor_amplitude));
    line("initial.field_amplitude", format_double(c.field_amplitude));
    line("initial.fields", fields);
    line("sweep.masses", format_list(c.masses));
    line("sweep.s", format_double(c.s));
    line("sweep.s_prime", format_double(c.s_prime));
    line("sweep.extra_s_prime", format_list(c.extra_s_prime));
    line("time.t_backward", format_double(c.t_backward));
    line("time.t_forward", format_double(c.t_forward));
    line("time.dt", format_double(c.dt));
    line("time.sample_interval", format_double(c.sample_interval));
    line("guard.tolerance", format_double(c.guard_tolerance));
    line("guard.max_halvings", std::to_string(c.guard_max_halvings));
    line("guard.enabled", c.guard_enabled ? "true" : "false");
    line("manybody.rank", std::to_string(c.rank));
    line("manybody.occupations", format_list(c.occupations));
    return out;
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        try {
            set_key(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

inline ExperimentConfig parse_config_string(const std::string& text, ExperimentConfig base = {}) {
    std::istringstream in(text);
    return parse_config(in, std::move(base));
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace dkg::lab
