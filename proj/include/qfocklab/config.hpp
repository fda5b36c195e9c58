#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: JSON schema, validation and round-trip.
 *
 * Example:
 *
 *     {"q": 0.5, "n_fixed": 0, "lambdas": [4], "cutoff": 6,
 *      "vectors": {"xi0": [1, 0]}, "t_grid": [0, 1],
 *      "n_max_moments": 6, "probe_degree": 2, "seed": 42}
 *
 * Vector entries are real coordinates (ς_1..ς_{N1}, ξ_1, ξ_2, ...). They are
 * normalized on load; the raw arrays are kept so the config round-trips.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "qcomb.hpp"
#include "repn.hpp"

namespace qfocklab {

struct NamedVector {
    std::string name;
    std::vector<double> raw;         ///< as written in the config
    std::vector<double> normalized;  ///< raw / ‖raw‖
    double original_norm = 0.0;

    bool operator==(const NamedVector&) const = default;
};

struct RunBudgets {
    std::size_t max_basis_words = 200000;
    std::size_t max_gram_entries = 40000000;
    std::size_t max_probe_span = 1024;
    std::size_t max_probe_entries = 20000000;

    bool operator==(const RunBudgets&) const = default;
};

struct RunConfig {
    double q = 0.0;
    int n_fixed = 0;
    std::vector<double> lambdas;
    int cutoff = 1;
    std::vector<NamedVector> vectors;  ///< sorted by name
    std::vector<double> t_grid{0.0};
    int n_max_moments = 0;
    int probe_degree = 0;
    std::uint64_t seed = 0;
    RunBudgets budgets;

    RepresentationSpec spec() const { return {n_fixed, lambdas}; }
    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"budgets", "cutoff",       "lambdas", "n_fixed", "n_max_moments",
                                               "probe_degree", "q", "seed", "t_grid", "vectors"};
    return keys;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline double get_real(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "expected a finite number");
    return v;
}

inline long long get_integer(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
    return j.get<long long>();
}

inline std::vector<double> get_real_array(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_real(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::size_t get_budget(const nlohmann::json& j, const std::string& field) {
    const long long v = get_integer(j, field);
    if (v < 1) throw ConfigError(field, "budget must be positive");
    return static_cast<std::size_t>(v);
}

} // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        const auto& keys = detail::config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, "unknown key");
    }
    for (const char* required : {"q", "n_fixed", "lambdas", "cutoff"})
        if (!j.contains(required)) throw ConfigError(required, "missing required key");

    RunConfig c;
    c.q = detail::get_real(j["q"], "q");
    if (!(c.q > -1.0 && c.q < 1.0)) throw ConfigError("q", "q must lie in (−1,1)");

    const long long n_fixed = detail::get_integer(j["n_fixed"], "n_fixed");
    if (n_fixed < 0 || n_fixed > 64) throw ConfigError("n_fixed", "must lie in [0, 64]");
    c.n_fixed = static_cast<int>(n_fixed);

    c.lambdas = detail::get_real_array(j["lambdas"], "lambdas");
    for (std::size_t k = 0; k < c.lambdas.size(); ++k)
        if (!(c.lambdas[k] > 1.0)) throw ConfigError("lambdas[" + std::to_string(k) + "]", "λ must exceed 1");
    if (c.spec().dim() == 0) throw ConfigError("n_fixed", "the representation must have positive dimension");

    const long long cutoff = detail::get_integer(j["cutoff"], "cutoff");
    if (cutoff < 1 || cutoff > 64) throw ConfigError("cutoff", "must lie in [1, 64]");
    c.cutoff = static_cast<int>(cutoff);

    if (j.contains("vectors")) {
        const auto& vs = j["vectors"];
        if (!vs.is_object()) throw ConfigError("vectors", "expected an object of named coordinate arrays");
        for (const auto& [name, arr] : vs.items()) {
            const std::string field = "vectors." + name;
            NamedVector v;
            v.name = name;
            v.raw = detail::get_real_array(arr, field);
            if (static_cast<int>(v.raw.size()) != c.spec().dim())
                throw ConfigError(field, "expected " + std::to_string(c.spec().dim()) + " coordinates, got " +
                                             std::to_string(v.raw.size()));
            double n2 = 0.0;
            for (double x : v.raw) n2 += x * x;
            v.original_norm = std::sqrt(n2);
            if (v.original_norm == 0.0) throw ConfigError(field, "vector must be nonzero");
            for (double x : v.raw) v.normalized.push_back(x / v.original_norm);
            c.vectors.push_back(std::move(v));
        }
    }

    if (j.contains("t_grid")) c.t_grid = detail::get_real_array(j["t_grid"], "t_grid");

    c.n_max_moments = c.cutoff - c.cutoff % 2;
    if (c.n_max_moments > kPairingGuard) c.n_max_moments = kPairingGuard;
    if (j.contains("n_max_moments")) {
        const long long n = detail::get_integer(j["n_max_moments"], "n_max_moments");
        if (n < 0 || n % 2) throw ConfigError("n_max_moments", "must be an even nonnegative integer");
        if (n > c.cutoff) throw ConfigError("n_max_moments", "must not exceed the cutoff");
        if (n > kPairingGuard)
            throw ConfigError("n_max_moments", "must not exceed " + std::to_string(kPairingGuard));
        c.n_max_moments = static_cast<int>(n);
    }

    if (j.contains("probe_degree")) {
        const long long d = detail::get_integer(j["probe_degree"], "probe_degree");
        if (d < 0) throw ConfigError("probe_degree", "must be nonnegative");
        if (d + 1 > c.cutoff) throw ConfigError("probe_degree", "needs cutoff ≥ probe_degree + 1");
        c.probe_degree = static_cast<int>(d);
    }

    if (j.contains("seed")) {
        const auto& s = j["seed"];
        if (s.is_number_unsigned()) c.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) c.seed = static_cast<std::uint64_t>(s.get<long long>());
        else throw ConfigError("seed", "expected a nonnegative 64-bit integer");
    }

    if (j.contains("budgets")) {
        const auto& b = j["budgets"];
        if (!b.is_object()) throw ConfigError("budgets", "expected an object");
        for (const auto& [key, value] : b.items()) {
            const std::string field = "budgets." + key;
            if (key == "max_basis_words") c.budgets.max_basis_words = detail::get_budget(value, field);
            else if (key == "max_gram_entries") c.budgets.max_gram_entries = detail::get_budget(value, field);
            else if (key == "max_probe_span") c.budgets.max_probe_span = detail::get_budget(value, field);
            else if (key == "max_probe_entries") c.budgets.max_probe_entries = detail::get_budget(value, field);
            else throw ConfigError(field, "unknown key");
        }
    }
    return c;
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                  ": " + e.what());
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Config echo with the raw vectors; config_from_json(config_to_json(c)) == c.
inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["q"] = c.q;
    j["n_fixed"] = c.n_fixed;
    j["lambdas"] = c.lambdas;
    j["cutoff"] = c.cutoff;
    j["vectors"] = nlohmann::json::object();
    for (const auto& v : c.vectors) j["vectors"][v.name] = v.raw;
    j["t_grid"] = c.t_grid;
    j["n_max_moments"] = c.n_max_moments;
    j["probe_degree"] = c.probe_degree;
    j["seed"] = c.seed;
    j["budgets"] = {{"max_basis_words", c.budgets.max_basis_words},
                    {"max_gram_entries", c.budgets.max_gram_entries},
                    {"max_probe_span", c.budgets.max_probe_span},
                    {"max_probe_entries", c.budgets.max_probe_entries}};
    return j;
}

} // namespace qfocklab
