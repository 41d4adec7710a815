// SPDX-License-Identifier: Apache-2.0
//
// Batch commands shared by the CLI and the tests. Each command renders either
// a CSV table (header row first) or a JSON document.
#pragma once

#include "lolrnet/config.hpp"
#include "lolrnet/control.hpp"
#include "lolrnet/network.hpp"
#include "lolrnet/ranking.hpp"
#include "lolrnet/simulate.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace lolrnet {

enum class OutputFormat { Table, Doc };

struct CommandOptions {
    std::uint64_t seed = 42;
    std::size_t paths = 100000;
    std::size_t steps = 200;
    double time = 0.0;
    OutputFormat format = OutputFormat::Table;
    bool dump_paths = false;
    std::optional<std::string> matrix_override;
    unsigned threads = 0;
};

struct CommandOutput {
    int exit_code = 0;
    std::string out;
    std::string err;
};

inline constexpr std::array<std::string_view, 5> kCommands = {"rank", "clearing", "regions",
                                                              "control", "simulate"};

inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitComputation = 4;

namespace detail {

using Doc = nlohmann::ordered_json;

/// 17 significant digits: enough to round-trip any double.
inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

inline Doc num_or_null(double v) { return std::isfinite(v) ? Doc(v) : Doc(nullptr); }

inline Doc opt_or_null(const std::optional<double>& v) {
    return v ? num_or_null(*v) : Doc(nullptr);
}

inline std::string opt_cell(const std::optional<double>& v) { return v ? fmt_num(*v) : ""; }

inline Doc vec_doc(const Vector& v) {
    Doc a = Doc::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num_or_null(v(i)));
    return a;
}

inline Doc mat_doc(const Matrix& m) {
    Doc a = Doc::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Doc row = Doc::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(num_or_null(m(i, j)));
        a.push_back(std::move(row));
    }
    return a;
}

// Names can hold commas or quotes; quote per RFC 4180 when needed.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvTable {
public:
    explicit CsvTable(const std::vector<std::string>& header) { add(header); }

    void add(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) ss_ << ',';
            ss_ << csv_field(cells[k]);
        }
        ss_ << '\n';
    }

    [[nodiscard]] std::string str() const { return ss_.str(); }

private:
    std::ostringstream ss_;
};

inline Doc header(std::string_view command) {
    Doc d;
    d["command"] = command;
    d["schema_version"] = kSchemaVersion;
    return d;
}

inline std::string render(const Doc& d) { return d.dump(2) + "\n"; }

/// Survival targets from the config policy; rank-based policies run the
/// ranking pipeline first.
inline Vector resolve_targets(const NetworkConfig& cfg, const FinancialNetwork& net) {
    if (const auto* u = std::get_if<UniformPolicy>(&cfg.policy)) {
        return Vector::Constant(static_cast<Eigen::Index>(net.size()), u->q);
    }
    return assign_survival_probabilities(rank_network(net, cfg.ranking).rank, cfg.policy);
}

inline std::string status_label(const ControlDecision& d) {
    if (d.net_creditor) return "net creditor / no default possible";
    switch (d.region) {
        case Region::NoAction: return "no action";
        case Region::Action: return "action";
        case Region::Infeasible: return "infeasible";
    }
    return "";
}

// ---------------------------------------------------------------------------

inline std::string cmd_rank(const NetworkConfig& cfg, const FinancialNetwork& net,
                            const CommandOptions& opt) {
    const auto n = static_cast<Eigen::Index>(net.size());
    std::string source = "computed";
    RankingResult r;
    if (opt.matrix_override) {
        source = "override";
        r.google = load_matrix_override(*opt.matrix_override);
        if (r.google.rows() != n) {
            throw DomainError("matrix override must be " + std::to_string(n) + "x" +
                              std::to_string(n));
        }
        r.net_positions = net_positions(net);
        const auto perron = perron_rank(r.google);
        r.eigenvalue = perron.eigenvalue;
        r.rank = perron.rank;
    } else {
        r = rank_network(net, cfg.ranking);
    }
    const auto series = series_rank(r.google, cfg.ranking.damping);
    const Vector q = assign_survival_probabilities(r.rank, cfg.policy);

    if (opt.format == OutputFormat::Doc) {
        Doc d = header("rank");
        d["source"] = source;
        d["eigenvalue"] = r.eigenvalue;
        Doc names = Doc::array();
        for (const auto& b : cfg.banks) names.push_back(b.name);
        d["banks"] = names;
        d["rank"] = vec_doc(r.rank);
        d["series_rank"] = vec_doc(series.normalized);
        d["q"] = vec_doc(q);
        d["net_positions"] = vec_doc(r.net_positions);
        d["google"] = mat_doc(r.google);
        if (source == "computed") {
            d["gamma_plus"] = mat_doc(r.gamma_plus);
            d["gamma_minus"] = mat_doc(r.gamma_minus);
            d["tau"] = mat_doc(r.tau);
        }
        return render(d);
    }
    CsvTable t({"bank", "name", "net_position", "rank", "series_rank", "q", "eigenvalue"});
    for (Eigen::Index i = 0; i < n; ++i) {
        t.add({std::to_string(i + 1), cfg.banks[static_cast<std::size_t>(i)].name,
               fmt_num(r.net_positions(i)), fmt_num(r.rank(i)), fmt_num(series.normalized(i)),
               fmt_num(q(i)), fmt_num(r.eigenvalue)});
    }
    return t.str();
}

inline std::string cmd_clearing(const NetworkConfig& cfg, const FinancialNetwork& net,
                                const CommandOptions& opt) {
    const auto res = clearing_vector(net, opt.time);
    const Vector ubar = total_obligations(net, opt.time);
    if (opt.format == OutputFormat::Doc) {
        Doc d = header("clearing");
        d["time"] = opt.time;
        d["iterations"] = res.iterations;
        d["residual"] = res.residual;
        Doc banks = Doc::array();
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            banks.push_back({{"name", cfg.banks[i].name},
                             {"obligation", ubar(k)},
                             {"payment", res.payments(k)},
                             {"defaulted", static_cast<bool>(res.defaulted[i])},
                             {"value", res.values(k)}});
        }
        d["banks"] = banks;
        return render(d);
    }
    CsvTable t({"bank", "name", "obligation", "payment", "defaulted", "value"});
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        t.add({std::to_string(i + 1), cfg.banks[i].name, fmt_num(ubar(k)),
               fmt_num(res.payments(k)), res.defaulted[i] ? "true" : "false",
               fmt_num(res.values(k))});
    }
    return t.str();
}

inline std::string cmd_regions(const NetworkConfig& cfg, const FinancialNetwork& net,
                               const CommandOptions& opt) {
    const Vector q = resolve_targets(cfg, net);
    const auto decision = network_decision(net, q, 0.0, cfg.psi_cap);
    const Vector v = default_boundaries(net, net.horizon());

    if (opt.format == OutputFormat::Doc) {
        Doc d = header("regions");
        Doc banks = Doc::array();
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const auto& dec = decision.banks[i];
            banks.push_back({{"name", cfg.banks[i].name},
                             {"v_terminal", v(k)},
                             {"q", q(k)},
                             {"log_x", std::log(net.cash()(k))},
                             {"threshold_log_x", opt_or_null(dec.threshold_log_x)},
                             {"region", to_string(dec.region)},
                             {"status", status_label(dec)}});
        }
        d["banks"] = banks;
        return render(d);
    }
    CsvTable t({"bank", "name", "v_terminal", "q", "log_x", "threshold_log_x", "region", "status"});
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const auto& dec = decision.banks[i];
        t.add({std::to_string(i + 1), cfg.banks[i].name, fmt_num(v(k)), fmt_num(q(k)),
               fmt_num(std::log(net.cash()(k))), opt_cell(dec.threshold_log_x),
               std::string(to_string(dec.region)), status_label(dec)});
    }
    return t.str();
}

inline std::string cmd_control(const NetworkConfig& cfg, const FinancialNetwork& net,
                               const CommandOptions& opt) {
    const Vector q = resolve_targets(cfg, net);
    const auto decision = network_decision(net, q, 0.0, cfg.psi_cap);

    if (opt.format == OutputFormat::Doc) {
        Doc d = header("control");
        d["psi_cap"] = cfg.psi_cap.is_unlimited() ? Doc("inf") : Doc(cfg.psi_cap.value());
        d["total_cost"] = num_or_null(decision.total_cost);
        Doc banks = Doc::array();
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto& dec = decision.banks[i];
            banks.push_back({{"name", cfg.banks[i].name},
                             {"q", q(static_cast<Eigen::Index>(i))},
                             {"region", to_string(dec.region)},
                             {"psi_star", opt_or_null(dec.psi_star)},
                             {"expected_cost", num_or_null(dec.expected_cost)},
                             {"survival_prob_uncontrolled", dec.survival_prob_uncontrolled},
                             {"survival_prob_controlled", dec.survival_prob_controlled}});
        }
        d["banks"] = banks;
        return render(d);
    }
    CsvTable t({"bank", "name", "q", "region", "psi_star", "expected_cost",
                "survival_prob_uncontrolled", "survival_prob_controlled"});
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& dec = decision.banks[i];
        t.add({std::to_string(i + 1), cfg.banks[i].name, fmt_num(q(static_cast<Eigen::Index>(i))),
               std::string(to_string(dec.region)), opt_cell(dec.psi_star),
               fmt_num(dec.expected_cost), fmt_num(dec.survival_prob_uncontrolled),
               fmt_num(dec.survival_prob_controlled)});
    }
    return t.str();
}

inline std::string cmd_simulate(const NetworkConfig& cfg, const FinancialNetwork& net,
                                const CommandOptions& opt) {
    const Vector q = resolve_targets(cfg, net);
    const auto decision = network_decision(net, q, 0.0, cfg.psi_cap);

    SimConfig sim;
    sim.paths = opt.paths;
    sim.steps = opt.steps;
    sim.seed = opt.seed;
    sim.threads = opt.threads;
    sim.record_paths = opt.dump_paths ? opt.paths : 0;
    const auto rep = simulate_network(net, decision.banks, sim);

    // Closed-form default probabilities, for comparison.
    std::vector<double> closed(net.size(), 0.0);
    std::vector<double> closed_unc(net.size(), 0.0);
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (decision.banks[i].net_creditor) continue;
        auto p = bank_problem(net, i, q(k), 0.0, RateCap::unlimited());
        closed[i] = 1.0 - survival_probability(p, net.cash()(k), rep.applied_rate(k));
        closed_unc[i] = 1.0 - survival_probability(p, net.cash()(k), 0.0);
    }

    const double dt = net.horizon() / static_cast<double>(rep.steps);
    if (opt.format == OutputFormat::Doc) {
        Doc d = header("simulate");
        d["seed"] = rep.seed_used;
        d["paths"] = rep.paths_used;
        d["steps"] = rep.steps;
        Doc banks = Doc::array();
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            banks.push_back({{"name", cfg.banks[i].name},
                             {"region", to_string(decision.banks[i].region)},
                             {"applied_rate", rep.applied_rate(k)},
                             {"boundary", rep.boundary(k)},
                             {"default_freq", rep.default_freq(k)},
                             {"default_ci_halfwidth", rep.default_ci_halfwidth(k)},
                             {"closed_form_default_prob", closed[i]},
                             {"default_freq_uncontrolled", rep.default_freq_uncontrolled(k)},
                             {"default_ci_halfwidth_uncontrolled",
                              rep.default_ci_halfwidth_uncontrolled(k)},
                             {"closed_form_default_prob_uncontrolled", closed_unc[i]},
                             {"mean_cost", rep.mean_cost(k)},
                             {"cost_ci_halfwidth", rep.cost_ci_halfwidth(k)},
                             {"terminal_mean", rep.terminal_mean(k)},
                             {"terminal_logvar", rep.terminal_logvar(k)},
                             {"infeasible_fallback", static_cast<bool>(rep.infeasible_fallback[i])}});
        }
        d["banks"] = banks;
        if (opt.dump_paths) {
            Doc traj = Doc::array();
            for (std::size_t b = 0; b < rep.trajectories.size(); ++b) {
                for (std::size_t p = 0; p < rep.trajectories[b].size(); ++p) {
                    Doc values = Doc::array();
                    for (double x : rep.trajectories[b][p]) values.push_back(x);
                    traj.push_back({{"bank", b + 1}, {"path", p}, {"values", values}});
                }
            }
            d["dt"] = dt;
            d["trajectories"] = traj;
        }
        return render(d);
    }

    CsvTable t({"bank", "name", "region", "applied_rate", "boundary", "default_freq",
                "default_ci_halfwidth", "closed_form_default_prob", "default_freq_uncontrolled",
                "default_ci_halfwidth_uncontrolled", "closed_form_default_prob_uncontrolled",
                "mean_cost",
                "cost_ci_halfwidth", "terminal_mean", "terminal_logvar", "infeasible_fallback"});
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        t.add({std::to_string(i + 1), cfg.banks[i].name,
               std::string(to_string(decision.banks[i].region)), fmt_num(rep.applied_rate(k)),
               fmt_num(rep.boundary(k)), fmt_num(rep.default_freq(k)),
               fmt_num(rep.default_ci_halfwidth(k)), fmt_num(closed[i]),
               fmt_num(rep.default_freq_uncontrolled(k)),
               fmt_num(rep.default_ci_halfwidth_uncontrolled(k)), fmt_num(closed_unc[i]),
               fmt_num(rep.mean_cost(k)), fmt_num(rep.cost_ci_halfwidth(k)),
               fmt_num(rep.terminal_mean(k)), fmt_num(rep.terminal_logvar(k)),
               rep.infeasible_fallback[i] ? "true" : "false"});
    }
    std::string out = t.str();
    if (opt.dump_paths) {
        CsvTable paths({"bank", "path", "step", "time", "value"});
        for (std::size_t b = 0; b < rep.trajectories.size(); ++b) {
            for (std::size_t p = 0; p < rep.trajectories[b].size(); ++p) {
                const auto& tr = rep.trajectories[b][p];
                for (std::size_t s = 0; s < tr.size(); ++s) {
                    paths.add({std::to_string(b + 1), std::to_string(p), std::to_string(s),
                               fmt_num(static_cast<double>(s) * dt), fmt_num(tr[s])});
                }
            }
        }
        out += "\n" + paths.str();
    }
    return out;
}

}  // namespace detail

/// Machine-readable error document: {"error": {"kind": ..., "message": ...}}.
[[nodiscard]] inline std::string error_document(std::string_view kind, std::string_view message) {
    nlohmann::ordered_json d;
    d["error"] = {{"kind", kind}, {"message", message}};
    return d.dump() + "\n";
}

/// Classifies an exception into an (exit code, error document) pair.
[[nodiscard]] inline CommandOutput error_output(const std::exception& e) {
    CommandOutput out;
    std::string_view kind = "error";
    out.exit_code = kExitComputation;
    if (dynamic_cast<const ConfigParseError*>(&e)) {
        kind = "config_parse_error";
        out.exit_code = kExitConfig;
    } else if (dynamic_cast<const SchemaVersionError*>(&e)) {
        kind = "schema_version_error";
        out.exit_code = kExitConfig;
    } else if (const auto* v = dynamic_cast<const ConfigValidationError*>(&e)) {
        nlohmann::ordered_json d;
        nlohmann::ordered_json issues = nlohmann::ordered_json::array();
        for (const auto& i : v->issues()) {
            issues.push_back({{"field", i.field}, {"message", i.message}});
        }
        d["error"] = {{"kind", "config_validation_error"}, {"message", e.what()}, {"issues", issues}};
        out.exit_code = kExitConfig;
        out.err = d.dump() + "\n";
        return out;
    } else if (dynamic_cast<const IterationLimitError*>(&e)) {
        kind = "iteration_limit_error";
    } else if (dynamic_cast<const DegeneracyError*>(&e)) {
        kind = "degeneracy_error";
    } else if (dynamic_cast<const DomainError*>(&e)) {
        kind = "domain_error";
    } else if (dynamic_cast<const IndexError*>(&e)) {
        kind = "index_error";
    }
    out.err = error_document(kind, e.what());
    return out;
}

/// Runs one command against a loaded config. Never throws: failures come back
/// as a nonzero exit code with an error document on `err`.
[[nodiscard]] inline CommandOutput run_command(std::string_view command, const NetworkConfig& cfg,
                                               const CommandOptions& opt) {
    try {
        const auto net = to_network(cfg);
        CommandOutput out;
        if (command == "rank") {
            out.out = detail::cmd_rank(cfg, net, opt);
        } else if (command == "clearing") {
            out.out = detail::cmd_clearing(cfg, net, opt);
        } else if (command == "regions") {
            out.out = detail::cmd_regions(cfg, net, opt);
        } else if (command == "control") {
            out.out = detail::cmd_control(cfg, net, opt);
        } else if (command == "simulate") {
            out.out = detail::cmd_simulate(cfg, net, opt);
        } else {
            out.exit_code = kExitUsage;
            out.err = error_document("unknown_command", "unknown command: " + std::string(command));
        }
        return out;
    } catch (const std::exception& e) {
        return error_output(e);
    }
}

}  // namespace lolrnet
