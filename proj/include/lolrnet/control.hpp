// SPDX-License-Identifier: Apache-2.0
//
// Closed-form lender-of-last-resort control under affine lending
// alpha = psi * X. With a constant rate psi the bank value is a GBM with drift
// mu + psi, so the terminal survival probability, the rate that exactly meets
// a target q, and the expected quadratic cost are all explicit.
#pragma once

#include "lolrnet/core.hpp"
#include "lolrnet/network.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lolrnet {

// ============================================================================
// RateCap: the maximum admissible lending rate, possibly unlimited
// ============================================================================

class RateCap {
public:
    [[nodiscard]] static RateCap unlimited() noexcept { return RateCap{}; }

    [[nodiscard]] static RateCap at_most(double cap) {
        if (!(cap > 0.0) || !std::isfinite(cap)) {
            throw DomainError("rate cap must be finite and > 0 (use RateCap::unlimited())");
        }
        return RateCap{cap};
    }

    [[nodiscard]] bool is_unlimited() const noexcept { return !cap_.has_value(); }

    /// Finite cap value; infinity when unlimited.
    [[nodiscard]] double value() const noexcept {
        return cap_ ? *cap_ : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] bool admits(double psi) const noexcept { return !cap_ || psi <= *cap_; }

    friend bool operator==(const RateCap&, const RateCap&) = default;

private:
    RateCap() = default;
    explicit RateCap(double cap) : cap_(cap) {}

    std::optional<double> cap_;
};

// ============================================================================
// Problem and decision types
// ============================================================================

struct ControlProblem {
    double mu = 0.0;
    double sigma = 0.0;
    double v_terminal = 0.0;  // default boundary at T
    double horizon_remaining = 0.0;
    double q = 0.5;
    RateCap psi_cap = RateCap::unlimited();

    /// Checks everything except the sign of v_terminal, which only the log
    /// formulas need.
    void validate_basic() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
        if (!(horizon_remaining > 0.0)) throw DomainError("horizon_remaining must be > 0");
        if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
        if (!std::isfinite(mu) || !std::isfinite(v_terminal)) {
            throw DomainError("mu and v_terminal must be finite");
        }
    }

    void validate() const {
        validate_basic();
        if (!(v_terminal > 0.0)) throw DomainError("v_terminal must be > 0");
    }
};

enum class Region { NoAction, Action, Infeasible };

[[nodiscard]] inline std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::NoAction: return "no_action";
        case Region::Action: return "action";
        case Region::Infeasible: return "infeasible";
    }
    return "unknown";
}

struct ControlDecision {
    Region region = Region::NoAction;
    std::optional<double> psi_star;  // absent when infeasible
    double expected_cost = 0.0;      // +inf when infeasible
    double survival_prob_uncontrolled = 1.0;
    double survival_prob_controlled = 1.0;
    std::optional<double> threshold_log_x;  // absent for net creditors
    bool net_creditor = false;

    /// Rate actually applied: psi* in the action region, else zero.
    [[nodiscard]] double applied_rate() const noexcept {
        return region == Region::Action ? psi_star.value_or(0.0) : 0.0;
    }
};

// ============================================================================
// Closed forms
// ============================================================================

/// rho(q) = sqrt(2) erfinv(1 - 2q) = -Phi^{-1}(q).
[[nodiscard]] inline double rho(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    return std::sqrt(2.0) * boost::math::erf_inv(1.0 - 2.0 * q);
}

/// P(X(T) >= v(T)) for a GBM started at x with drift mu + psi.
[[nodiscard]] inline double survival_probability(const ControlProblem& p, double x, double psi) {
    p.validate();
    if (!(x > 0.0)) throw DomainError("current value x must be > 0");
    if (!(psi >= 0.0) || !p.psi_cap.admits(psi)) {
        throw DomainError("rate psi must lie in [0, cap]");
    }
    const double tau = p.horizon_remaining;
    const double d = (std::log(p.v_terminal / x) - (p.mu + psi - 0.5 * p.sigma * p.sigma) * tau) /
                     std::sqrt(2.0 * p.sigma * p.sigma * tau);
    return 0.5 * std::erfc(d);
}

/// The constant rate whose survival probability is exactly q. Negative when
/// the uncontrolled process already meets the target.
[[nodiscard]] inline double switching_rate(const ControlProblem& p, double x) {
    p.validate();
    if (!(x > 0.0)) throw DomainError("current value x must be > 0");
    const double tau = p.horizon_remaining;
    return (0.5 * p.sigma * p.sigma - p.mu) + std::log(p.v_terminal / x) / tau -
           p.sigma * rho(p.q) / std::sqrt(tau);
}

/// log x on the zero-rate switching curve; above it no lending is needed.
[[nodiscard]] inline double no_action_threshold(const ControlProblem& p) {
    p.validate();
    const double tau = p.horizon_remaining;
    return std::log(p.v_terminal) + (0.5 * p.sigma * p.sigma - p.mu) * tau -
           p.sigma * rho(p.q) * std::sqrt(tau);
}

/// Expected cost 1/2 E[int_t^T psi^2 X(s)^2 ds] under a constant rate psi:
///   1/2 psi^2 x^2 (exp(c (T - t)) - 1) / c,   c = 2(mu + psi) + sigma^2.
/// The exponent runs over the remaining time (T - t), so the cost is positive
/// for either sign of c. estimate_cost checks this against Monte Carlo.
[[nodiscard]] inline double value_function(const ControlProblem& p, double x, double psi) {
    p.validate_basic();
    if (!(x > 0.0)) throw DomainError("current value x must be > 0");
    if (!(psi >= 0.0)) throw DomainError("rate psi must be >= 0");
    const double tau = p.horizon_remaining;
    const double c = 2.0 * (p.mu + psi) + p.sigma * p.sigma;
    const double scale = 0.5 * psi * psi * x * x;
    if (c == 0.0) return scale * tau;
    return scale * std::expm1(c * tau) / c;
}

/// Region classification at current value x. Ties go to the cheaper label:
/// a zero rate is NoAction and a rate equal to the cap is Action.
[[nodiscard]] inline ControlDecision classify(const ControlProblem& p, double x) {
    p.validate_basic();
    if (!(x > 0.0)) throw DomainError("current value x must be > 0");

    ControlDecision out;
    if (p.v_terminal <= 0.0) {
        out.region = Region::NoAction;
        out.psi_star = 0.0;
        out.net_creditor = true;
        return out;
    }

    const double g = switching_rate(p, x);
    out.threshold_log_x = no_action_threshold(p);
    out.survival_prob_uncontrolled = survival_probability(p, x, 0.0);
    if (g <= 0.0) {
        out.region = Region::NoAction;
        out.psi_star = 0.0;
        out.survival_prob_controlled = out.survival_prob_uncontrolled;
    } else if (p.psi_cap.admits(g)) {
        out.region = Region::Action;
        out.psi_star = g;
        out.expected_cost = value_function(p, x, g);
        out.survival_prob_controlled = survival_probability(p, x, g);
    } else {
        out.region = Region::Infeasible;
        out.expected_cost = std::numeric_limits<double>::infinity();
        out.survival_prob_controlled = survival_probability(p, x, p.psi_cap.value());
    }
    return out;
}

// ============================================================================
// Network level
// ============================================================================

struct NetworkDecision {
    std::vector<ControlDecision> banks;
    double total_cost = 0.0;
};

/// Per-bank problem at time t: current value is the bank's cash, boundary is
/// the terminal default boundary.
[[nodiscard]] inline ControlProblem bank_problem(const FinancialNetwork& net, std::size_t i,
                                                 double q, double t, RateCap cap) {
    net.check_index(i);
    net.check_time(t);
    const auto k = static_cast<Eigen::Index>(i);
    ControlProblem p;
    p.mu = net.drift()(k);
    p.sigma = net.vol()(k);
    p.v_terminal = default_boundary(net, i, net.horizon());
    p.horizon_remaining = net.horizon() - t;
    p.q = q;
    p.psi_cap = cap;
    return p;
}

/// Banks are independent, so the network cost is the sum of per-bank costs.
[[nodiscard]] inline NetworkDecision network_decision(const FinancialNetwork& net, const Vector& q,
                                                      double t, RateCap cap) {
    if (static_cast<std::size_t>(q.size()) != net.size()) {
        throw DomainError("q must have one entry per bank");
    }
    NetworkDecision out;
    out.banks.reserve(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto p = bank_problem(net, i, q(static_cast<Eigen::Index>(i)), t, cap);
        const double x = net.cash()(static_cast<Eigen::Index>(i));
        out.banks.push_back(classify(p, x));
        out.total_cost += out.banks.back().expected_cost;
    }
    return out;
}

}  // namespace lolrnet
