#pragma once

// Run configuration. One JSON document drives every subcommand; only
// the sections a command needs are read. Validation is strict: unknown
// keys anywhere are rejected so a typo fails loudly instead of silently
// falling back to a default.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "axioms.hpp"
#include "errors.hpp"
#include "linalg2.hpp"
#include "skewproduct.hpp"
#include "thermo.hpp"

namespace cospec {

inline constexpr int kConfigSchemaVersion = 1;

struct RunConfig {
    std::vector<FiberMap> maps;
    int word_length = 16;
    double bin_width = 0.0;  // 0: use the default rule
    StatisticPolicy policy = StatisticPolicy::max_over_fiber();
    bool custom_q_grid = false;
    double q_min = -20.0, q_max = 20.0, q_step = 0.1;
    Arc core{0.45, 0.1};
    Arc target{0.45, 0.1};
    CecOptions cec;
    AccOptions acc;
    SyncOptions sync;
    std::vector<double> weights;  // empty: uniform
    std::uint64_t track_length = 400;
    std::vector<std::uint64_t> checkpoints;  // empty: eighths of the length
    std::size_t perturb_index = 0;
    double perturb_amount = 0.01;  // diagonal stretch parameter, > -1
    int search_depth = 8;

    FiberSystem system() const { return FiberSystem(maps); }

    BernoulliSampler sampler(std::uint64_t seed) const {
        if (weights.empty())
            return BernoulliSampler::uniform(static_cast<int>(maps.size()), seed);
        return BernoulliSampler(weights, seed);
    }

    std::vector<std::uint64_t> track_checkpoints() const {
        if (!checkpoints.empty()) return checkpoints;
        std::vector<std::uint64_t> cps;
        for (int i = 1; i <= 8; ++i) {
            std::uint64_t c = track_length * static_cast<std::uint64_t>(i) / 8;
            if (c >= 1 && (cps.empty() || c > cps.back())) cps.push_back(c);
        }
        return cps;
    }

    std::vector<double> q_grid() const {
        if (!custom_q_grid) return default_q_grid();
        std::vector<double> q;
        for (int i = 0;; ++i) {
            double v = q_min + static_cast<double>(i) * q_step;
            if (v > q_max + 0.5 * q_step) break;
            q.push_back(v);
        }
        return q;
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline const json& member(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    return *it;
}

inline double number(const json& j, const char* key, const std::string& where) {
    const json& v = member(j, key, where);
    if (!v.is_number()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& j, const char* key, double dflt, const std::string& where) {
    if (j.find(key) == j.end()) return dflt;
    return number(j, key, where);
}

inline std::int64_t integer(const json& j, const char* key, const std::string& where) {
    const json& v = member(j, key, where);
    if (!v.is_number_integer())
        throw ConfigError("'" + std::string(key) + "' in " + where + " must be an integer");
    return v.get<std::int64_t>();
}

inline std::int64_t integer_or(const json& j, const char* key, std::int64_t dflt,
                               const std::string& where) {
    if (j.find(key) == j.end()) return dflt;
    return integer(j, key, where);
}

inline Arc parse_arc(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown(j, {"start", "length"}, where);
    return {number(j, "start", where), number(j, "length", where)};
}

inline FiberMap parse_map(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const json& kind = member(j, "kind", where);
    if (!kind.is_string()) throw ConfigError("'kind' in " + where + " must be a string");
    std::string k = kind.get<std::string>();
    try {
        if (k == "matrix") {
            reject_unknown(j, {"kind", "entries"}, where);
            const json& e = member(j, "entries", where);
            if (!e.is_array() || e.size() != 4)
                throw ConfigError("'entries' in " + where + " must be 4 numbers");
            for (const auto& x : e)
                if (!x.is_number())
                    throw ConfigError("'entries' in " + where + " must be 4 numbers");
            return FiberMap::matrix(mat2(e[0].get<double>(), e[1].get<double>(),
                                         e[2].get<double>(), e[3].get<double>()));
        }
        if (k == "rotation") {
            reject_unknown(j, {"kind", "amount"}, where);
            return FiberMap::rotation(number(j, "amount", where));
        }
        if (k == "rotation_matrix") {
            // SL(2,R) rotation by `amount` half-turns acting projectively,
            // as opposed to "rotation" which is a rigid circle rotation.
            reject_unknown(j, {"kind", "amount"}, where);
            return FiberMap::matrix(rotation_half_turns(number(j, "amount", where)));
        }
        if (k == "morse_smale") {
            reject_unknown(j, {"kind", "attractor", "repeller", "contraction"}, where);
            return FiberMap::morse_smale(number(j, "attractor", where),
                                         number(j, "repeller", where),
                                         number(j, "contraction", where));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError("unknown map kind '" + k + "' in " + where);
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& doc) {
    using detail::integer_or;
    using detail::member;
    using detail::number;
    using detail::number_or;
    using nlohmann::json;
    if (!doc.is_object()) throw ConfigError("configuration root must be an object");
    detail::reject_unknown(doc,
                           {"schema_version", "maps", "word_length", "bin_width", "policy",
                            "fixed_point", "q_min", "q_max", "q_step", "core_arc", "target_arc",
                            "cec", "acc", "sync", "weights", "track", "perturb"},
                           "configuration");
    if (detail::integer(doc, "schema_version", "configuration") != kConfigSchemaVersion)
        throw ConfigError("unsupported schema_version (expected 1)");

    RunConfig cfg;
    const json& maps = member(doc, "maps", "configuration");
    if (!maps.is_array() || maps.size() < 2)
        throw ConfigError("'maps' must be an array of >= 2 fiber maps");
    for (std::size_t i = 0; i < maps.size(); ++i)
        cfg.maps.push_back(detail::parse_map(maps[i], "maps[" + std::to_string(i) + "]"));

    cfg.word_length = static_cast<int>(integer_or(doc, "word_length", 16, "configuration"));
    cfg.bin_width = number_or(doc, "bin_width", 0.0, "configuration");

    if (auto it = doc.find("policy"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("'policy' must be a string");
        std::string p = it->get<std::string>();
        if (p == "max_over_fiber") {
            cfg.policy = StatisticPolicy::max_over_fiber();
        } else if (p == "min_over_fiber") {
            cfg.policy = StatisticPolicy::min_over_fiber();
        } else if (p == "fixed_point") {
            cfg.policy =
                StatisticPolicy::fixed_point(number(doc, "fixed_point", "configuration"));
        } else {
            throw ConfigError("unknown policy '" + p + "'");
        }
    } else if (doc.find("fixed_point") != doc.end()) {
        throw ConfigError("'fixed_point' needs policy \"fixed_point\"");
    }

    bool has_q = false;
    if (doc.find("q_min") != doc.end() || doc.find("q_max") != doc.end() ||
        doc.find("q_step") != doc.end())
        has_q = true;
    if (has_q) {
        cfg.custom_q_grid = true;
        cfg.q_min = number(doc, "q_min", "configuration");
        cfg.q_max = number(doc, "q_max", "configuration");
        cfg.q_step = number(doc, "q_step", "configuration");
        if (!(cfg.q_step > 0.0) || cfg.q_min > cfg.q_max)
            throw ConfigError("q grid needs q_step > 0 and q_min <= q_max");
    }

    if (auto it = doc.find("core_arc"); it != doc.end())
        cfg.core = detail::parse_arc(*it, "core_arc");
    cfg.target = cfg.core;
    if (auto it = doc.find("target_arc"); it != doc.end())
        cfg.target = detail::parse_arc(*it, "target_arc");

    if (auto it = doc.find("cec"); it != doc.end()) {
        detail::reject_unknown(*it, {"max_len", "margin", "expansion_floor"}, "cec");
        cfg.cec.max_len = static_cast<int>(integer_or(*it, "max_len", cfg.cec.max_len, "cec"));
        cfg.cec.margin = number_or(*it, "margin", cfg.cec.margin, "cec");
        cfg.cec.expansion_floor =
            number_or(*it, "expansion_floor", cfg.cec.expansion_floor, "cec");
    }
    if (auto it = doc.find("acc"); it != doc.end()) {
        detail::reject_unknown(*it, {"grid", "max_depth"}, "acc");
        cfg.acc.grid = static_cast<int>(integer_or(*it, "grid", cfg.acc.grid, "acc"));
        cfg.acc.max_depth =
            static_cast<int>(integer_or(*it, "max_depth", cfg.acc.max_depth, "acc"));
    }
    if (auto it = doc.find("sync"); it != doc.end()) {
        detail::reject_unknown(*it, {"samples", "steps", "grid", "tol"}, "sync");
        cfg.sync.samples = static_cast<int>(integer_or(*it, "samples", cfg.sync.samples, "sync"));
        cfg.sync.steps = static_cast<std::uint64_t>(
            integer_or(*it, "steps", static_cast<std::int64_t>(cfg.sync.steps), "sync"));
        cfg.sync.grid = static_cast<int>(integer_or(*it, "grid", cfg.sync.grid, "sync"));
        cfg.sync.tol = number_or(*it, "tol", cfg.sync.tol, "sync");
    }
    if (auto it = doc.find("weights"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("'weights' must be an array of numbers");
        for (const auto& w : *it) {
            if (!w.is_number()) throw ConfigError("'weights' must be an array of numbers");
            cfg.weights.push_back(w.get<double>());
        }
        if (cfg.weights.size() != cfg.maps.size())
            throw ConfigError("'weights' length must match the number of maps");
    }
    if (auto it = doc.find("track"); it != doc.end()) {
        detail::reject_unknown(*it, {"length", "checkpoints"}, "track");
        cfg.track_length = static_cast<std::uint64_t>(
            integer_or(*it, "length", static_cast<std::int64_t>(cfg.track_length), "track"));
        if (auto cp = it->find("checkpoints"); cp != it->end()) {
            if (!cp->is_array()) throw ConfigError("'checkpoints' must be an array of integers");
            for (const auto& c : *cp) {
                if (!c.is_number_integer() || c.get<std::int64_t>() < 1)
                    throw ConfigError("'checkpoints' must be positive integers");
                cfg.checkpoints.push_back(c.get<std::uint64_t>());
            }
        }
    }
    if (auto it = doc.find("perturb"); it != doc.end()) {
        detail::reject_unknown(*it, {"index", "amount", "max_depth"}, "perturb");
        std::int64_t idx = integer_or(*it, "index", 0, "perturb");
        if (idx < 0 || static_cast<std::size_t>(idx) >= cfg.maps.size())
            throw ConfigError("'index' in perturb is out of range");
        cfg.perturb_index = static_cast<std::size_t>(idx);
        cfg.perturb_amount = number_or(*it, "amount", cfg.perturb_amount, "perturb");
        if (!(cfg.perturb_amount > -1.0))
            throw ConfigError("'amount' in perturb must exceed -1");
        cfg.search_depth =
            static_cast<int>(integer_or(*it, "max_depth", cfg.search_depth, "perturb"));
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

} // namespace cospec
