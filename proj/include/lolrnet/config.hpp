// SPDX-License-Identifier: Apache-2.0
//
// NetworkConfig JSON documents: parsing with field-path validation, writing,
// and conversion to a FinancialNetwork.
#pragma once

#include "lolrnet/control.hpp"
#include "lolrnet/core.hpp"
#include "lolrnet/network.hpp"
#include "lolrnet/ranking.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lolrnet {

inline constexpr const char* kSchemaVersion = "lolrnet/1";

struct BankSpec {
    std::string name;
    double cash = 0.0;
    double drift = 0.0;
    double vol = 0.0;
    double recovery = 0.5;

    friend bool operator==(const BankSpec&, const BankSpec&) = default;
};

struct NetworkConfig {
    std::string schema_version = kSchemaVersion;
    std::string comment;
    std::vector<BankSpec> banks;
    std::vector<std::vector<double>> liabilities;  // [i][j] = bank i owes bank j
    double growth_rate = 0.0;
    double horizon = 1.0;
    RankWeights ranking;
    QPolicy policy = UniformPolicy{};
    RateCap psi_cap = RateCap::unlimited();

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// ============================================================================
// Errors
// ============================================================================

class ConfigError : public Error {
public:
    using Error::Error;
};

class ConfigParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class SchemaVersionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct FieldIssue {
    std::string field;
    std::string message;
};

/// Every invariant violation found in one document, each with its field path.
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<FieldIssue> issues)
        : ConfigError(summarize(issues)), issues_(std::move(issues)) {}

    [[nodiscard]] const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

    [[nodiscard]] bool mentions(const std::string& field) const {
        for (const auto& i : issues_) {
            if (i.field == field) return true;
        }
        return false;
    }

private:
    static std::string summarize(const std::vector<FieldIssue>& issues) {
        std::string s = "invalid config:";
        for (const auto& i : issues) s += " " + i.field + ": " + i.message + ";";
        return s;
    }

    std::vector<FieldIssue> issues_;
};

// ============================================================================
// Parsing
// ============================================================================

namespace detail {

class FieldReader {
public:
    std::vector<FieldIssue> issues;

    void fail(const std::string& field, const std::string& message) {
        issues.push_back({field, message});
    }

    std::optional<double> number(const nlohmann::json& obj, const std::string& key,
                                 const std::string& path) {
        if (!obj.is_object() || !obj.contains(key)) {
            fail(path, "required number is missing");
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(path, "must be a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(path, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::string> string(const nlohmann::json& obj, const std::string& key,
                                      const std::string& path) {
        if (!obj.is_object() || !obj.contains(key)) {
            fail(path, "required string is missing");
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            fail(path, "must be a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }
};

inline void parse_banks(const nlohmann::json& doc, FieldReader& r, NetworkConfig& cfg) {
    if (!doc.contains("banks") || !doc.at("banks").is_array() || doc.at("banks").empty()) {
        r.fail("banks", "must be a non-empty array");
        return;
    }
    const auto& banks = doc.at("banks");
    for (std::size_t k = 0; k < banks.size(); ++k) {
        const auto& b = banks[k];
        const std::string base = "banks[" + std::to_string(k) + "]";
        BankSpec spec;
        spec.name = r.string(b, "name", base + ".name").value_or("");
        if (auto v = r.number(b, "cash", base + ".cash")) {
            spec.cash = *v;
            if (*v < 0.0) r.fail(base + ".cash", "must be >= 0");
        }
        if (auto v = r.number(b, "drift", base + ".drift")) spec.drift = *v;
        if (auto v = r.number(b, "vol", base + ".vol")) {
            spec.vol = *v;
            if (!(*v > 0.0)) r.fail(base + ".vol", "must be > 0");
        }
        if (auto v = r.number(b, "recovery", base + ".recovery")) {
            spec.recovery = *v;
            if (!(*v > 0.0 && *v < 1.0)) r.fail(base + ".recovery", "must lie in (0, 1)");
        }
        cfg.banks.push_back(std::move(spec));
    }
}

inline void parse_liabilities(const nlohmann::json& doc, FieldReader& r, NetworkConfig& cfg) {
    const std::size_t n = cfg.banks.size();
    if (!doc.contains("liabilities") || !doc.at("liabilities").is_array()) {
        r.fail("liabilities", "must be an n x n array");
        return;
    }
    const auto& rows = doc.at("liabilities");
    if (rows.size() != n) {
        r.fail("liabilities", "must have " + std::to_string(n) + " rows");
        return;
    }
    cfg.liabilities.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row_path = "liabilities[" + std::to_string(i) + "]";
        if (!rows[i].is_array() || rows[i].size() != n) {
            r.fail(row_path, "must have " + std::to_string(n) + " entries");
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::string path = row_path + "[" + std::to_string(j) + "]";
            const auto& v = rows[i][j];
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                r.fail(path, "must be a finite number");
                continue;
            }
            const double d = v.get<double>();
            cfg.liabilities[i][j] = d;
            if (d < 0.0) r.fail(path, "must be >= 0");
            if (i == j && d != 0.0) r.fail(path, "diagonal must be zero");
        }
    }
}

inline void parse_ranking(const nlohmann::json& doc, FieldReader& r, NetworkConfig& cfg) {
    if (!doc.contains("ranking")) return;  // defaults
    const auto& rk = doc.at("ranking");
    if (!rk.is_object()) {
        r.fail("ranking", "must be an object");
        return;
    }
    auto& w = cfg.ranking;
    if (auto v = r.number(rk, "c_plus", "ranking.c_plus")) w.c_plus = *v;
    if (auto v = r.number(rk, "c_minus", "ranking.c_minus")) w.c_minus = *v;
    if (rk.contains("damping")) {
        if (auto v = r.number(rk, "damping", "ranking.damping")) w.damping = *v;
    }
    if (rk.contains("epsilon")) {
        if (auto v = r.number(rk, "epsilon", "ranking.epsilon")) w.epsilon = *v;
    }
    if (w.c_plus < 0.0) r.fail("ranking.c_plus", "must be >= 0");
    if (w.c_minus < 0.0) r.fail("ranking.c_minus", "must be >= 0");
    if (std::abs(w.c_plus + w.c_minus - 1.0) > 1e-12) {
        r.fail("ranking", "c_plus + c_minus must equal 1");
    }
    if (!(w.damping > 0.0 && w.damping < 1.0)) r.fail("ranking.damping", "must lie in (0, 1)");
    if (w.epsilon < 0.0) r.fail("ranking.epsilon", "must be >= 0");
}

inline void parse_policy(const nlohmann::json& doc, FieldReader& r, NetworkConfig& cfg) {
    if (!doc.contains("policy") || !doc.at("policy").is_object()) {
        r.fail("policy", "must be an object");
        return;
    }
    const auto& p = doc.at("policy");
    const auto kind = r.string(p, "kind", "policy.kind");
    if (!kind) return;
    if (*kind == "uniform") {
        UniformPolicy u;
        if (auto v = r.number(p, "q", "policy.q")) {
            u.q = *v;
            if (!(*v >= 0.0 && *v < 1.0)) r.fail("policy.q", "must lie in [0, 1)");
        }
        cfg.policy = u;
    } else if (*kind == "rank_thresholds") {
        RankThresholdPolicy t;
        if (auto v = r.number(p, "base", "policy.base")) t.base = *v;
        if (!p.contains("steps") || !p.at("steps").is_array()) {
            r.fail("policy.steps", "must be an array");
        } else {
            const auto& steps = p.at("steps");
            for (std::size_t k = 0; k < steps.size(); ++k) {
                const std::string base = "policy.steps[" + std::to_string(k) + "]";
                ThresholdStep s;
                if (auto v = r.number(steps[k], "threshold", base + ".threshold")) s.threshold = *v;
                if (auto v = r.number(steps[k], "increment", base + ".increment")) s.increment = *v;
                t.steps.push_back(s);
            }
        }
        try {
            validate_policy(t);
        } catch (const DomainError& e) {
            r.fail("policy", e.what());
        }
        cfg.policy = std::move(t);
    } else {
        r.fail("policy.kind", "must be \"uniform\" or \"rank_thresholds\"");
    }
}

inline void parse_cap(const nlohmann::json& doc, FieldReader& r, NetworkConfig& cfg) {
    if (!doc.contains("psi_cap")) {
        r.fail("psi_cap", "required: a positive number or \"inf\"");
        return;
    }
    const auto& v = doc.at("psi_cap");
    if (v.is_string() && v.get<std::string>() == "inf") {
        cfg.psi_cap = RateCap::unlimited();
    } else if (v.is_number() && v.get<double>() > 0.0 && std::isfinite(v.get<double>())) {
        cfg.psi_cap = RateCap::at_most(v.get<double>());
    } else {
        r.fail("psi_cap", "must be a positive number or \"inf\"");
    }
}

}  // namespace detail

/// Parses and validates a document already read into memory.
[[nodiscard]] inline NetworkConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigParseError("config root must be an object");
    if (!doc.contains("schema_version") || !doc.at("schema_version").is_string()) {
        throw SchemaVersionError("schema_version missing; expected \"" +
                                 std::string(kSchemaVersion) + "\"");
    }
    if (doc.at("schema_version").get<std::string>() != kSchemaVersion) {
        throw SchemaVersionError("unrecognized schema_version \"" +
                                 doc.at("schema_version").get<std::string>() + "\"; expected \"" +
                                 kSchemaVersion + "\"");
    }

    NetworkConfig cfg;
    detail::FieldReader r;
    if (doc.contains("comment") && doc.at("comment").is_string()) {
        cfg.comment = doc.at("comment").get<std::string>();
    }
    detail::parse_banks(doc, r, cfg);
    detail::parse_liabilities(doc, r, cfg);
    if (auto v = r.number(doc, "growth_rate", "growth_rate")) cfg.growth_rate = *v;
    if (auto v = r.number(doc, "horizon", "horizon")) {
        cfg.horizon = *v;
        if (!(*v > 0.0)) r.fail("horizon", "must be > 0");
    }
    detail::parse_ranking(doc, r, cfg);
    detail::parse_policy(doc, r, cfg);
    detail::parse_cap(doc, r, cfg);

    if (!r.issues.empty()) throw ConfigValidationError(std::move(r.issues));
    return cfg;
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline NetworkConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path));
}

// ============================================================================
// Writing
// ============================================================================

[[nodiscard]] inline nlohmann::ordered_json to_json(const NetworkConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = cfg.schema_version;
    if (!cfg.comment.empty()) doc["comment"] = cfg.comment;
    doc["banks"] = nlohmann::ordered_json::array();
    for (const auto& b : cfg.banks) {
        doc["banks"].push_back({{"name", b.name},
                                {"cash", b.cash},
                                {"drift", b.drift},
                                {"vol", b.vol},
                                {"recovery", b.recovery}});
    }
    doc["liabilities"] = cfg.liabilities;
    doc["growth_rate"] = cfg.growth_rate;
    doc["horizon"] = cfg.horizon;
    doc["ranking"] = {{"c_plus", cfg.ranking.c_plus},
                      {"c_minus", cfg.ranking.c_minus},
                      {"damping", cfg.ranking.damping},
                      {"epsilon", cfg.ranking.epsilon}};
    if (const auto* u = std::get_if<UniformPolicy>(&cfg.policy)) {
        doc["policy"] = {{"kind", "uniform"}, {"q", u->q}};
    } else {
        const auto& t = std::get<RankThresholdPolicy>(cfg.policy);
        nlohmann::ordered_json steps = nlohmann::ordered_json::array();
        for (const auto& s : t.steps) {
            steps.push_back({{"threshold", s.threshold}, {"increment", s.increment}});
        }
        doc["policy"] = {{"kind", "rank_thresholds"}, {"base", t.base}, {"steps", steps}};
    }
    if (cfg.psi_cap.is_unlimited()) {
        doc["psi_cap"] = "inf";
    } else {
        doc["psi_cap"] = cfg.psi_cap.value();
    }
    return doc;
}

inline void write_config(const std::filesystem::path& path, const NetworkConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << to_json(cfg).dump(2) << '\n';
}

// ============================================================================
// Conversion
// ============================================================================

[[nodiscard]] inline FinancialNetwork to_network(const NetworkConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(cfg.banks.size());
    Matrix l(n, n);
    Vector cash(n), drift(n), vol(n), recovery(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = cfg.banks[static_cast<std::size_t>(i)];
        cash(i) = b.cash;
        drift(i) = b.drift;
        vol(i) = b.vol;
        recovery(i) = b.recovery;
        for (Eigen::Index j = 0; j < n; ++j) {
            l(i, j) = cfg.liabilities[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return FinancialNetwork(std::move(l), std::move(cash), std::move(drift), std::move(vol),
                            std::move(recovery), cfg.growth_rate, cfg.horizon);
}

/// Reads a Google-matrix override: either a bare square array or an object
/// with a "google" member.
[[nodiscard]] inline Matrix load_matrix_override(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigParseError(std::string("matrix override is not valid JSON: ") + e.what());
    }
    const nlohmann::json& rows = doc.is_object() && doc.contains("google") ? doc.at("google") : doc;
    if (!rows.is_array() || rows.empty()) {
        throw ConfigValidationError(
            std::vector<FieldIssue>{{"google", "must be a non-empty square array"}});
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigValidationError(
                {{"google[" + std::to_string(i) + "]", "must have " + std::to_string(n) + " entries"}});
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number()) {
                throw ConfigValidationError({{"google[" + std::to_string(i) + "][" +
                                                  std::to_string(j) + "]",
                                              "must be a number"}});
            }
            m(i, j) = v.get<double>();
        }
    }
    return m;
}

}  // namespace lolrnet
