// SPDX-License-Identifier: Apache-2.0
//
// Interbank liabilities graph: relative liabilities, clearing payments,
// bank values, liability growth and terminal default boundaries.
//
// Orientation convention: liabilities(i, j) is the amount bank i owes bank j.
#pragma once

#include "lolrnet/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace lolrnet {

// ============================================================================
// FinancialNetwork
// ============================================================================

class FinancialNetwork {
public:
    FinancialNetwork(Matrix liabilities, Vector cash, Vector drift, Vector vol,
                     Vector recovery, double growth_rate, double horizon)
        : liabilities_(std::move(liabilities)), cash_(std::move(cash)),
          drift_(std::move(drift)), vol_(std::move(vol)),
          recovery_(std::move(recovery)), growth_rate_(growth_rate),
          horizon_(horizon) {
        validate();
    }

    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(cash_.size());
    }
    [[nodiscard]] const Matrix& liabilities() const noexcept { return liabilities_; }
    [[nodiscard]] const Vector& cash() const noexcept { return cash_; }
    [[nodiscard]] const Vector& drift() const noexcept { return drift_; }
    [[nodiscard]] const Vector& vol() const noexcept { return vol_; }
    [[nodiscard]] const Vector& recovery() const noexcept { return recovery_; }
    [[nodiscard]] double growth_rate() const noexcept { return growth_rate_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }

    /// Liabilities grown to time t: L(t) = L * exp(growth_rate * t).
    [[nodiscard]] Matrix liabilities_at(double t) const {
        check_time(t);
        return liabilities_ * std::exp(growth_rate_ * t);
    }

    void check_time(double t) const {
        if (!(t >= 0.0 && t <= horizon_)) {
            throw DomainError("time " + std::to_string(t) + " outside [0, " +
                              std::to_string(horizon_) + "]");
        }
    }

    void check_index(std::size_t i) const {
        if (i >= size()) {
            throw IndexError("bank index " + std::to_string(i) + " out of range for " +
                             std::to_string(size()) + " banks");
        }
    }

private:
    void validate() const {
        const auto n = cash_.size();
        if (n < 1) throw DomainError("network needs at least one bank");
        if (liabilities_.rows() != n || liabilities_.cols() != n) {
            throw DomainError("liabilities must be " + std::to_string(n) + "x" +
                              std::to_string(n));
        }
        if (drift_.size() != n || vol_.size() != n || recovery_.size() != n) {
            throw DomainError("drift, vol and recovery must have one entry per bank");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto idx = "[" + std::to_string(i) + "]";
            if (liabilities_(i, i) != 0.0) {
                throw DomainError("liabilities" + idx + idx + " must be zero");
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!(liabilities_(i, j) >= 0.0) || !std::isfinite(liabilities_(i, j))) {
                    throw DomainError("liabilities" + idx + "[" + std::to_string(j) +
                                      "] must be finite and >= 0");
                }
            }
            if (!(cash_(i) >= 0.0) || !std::isfinite(cash_(i))) {
                throw DomainError("cash" + idx + " must be finite and >= 0");
            }
            if (!std::isfinite(drift_(i))) throw DomainError("drift" + idx + " must be finite");
            if (!(vol_(i) > 0.0) || !std::isfinite(vol_(i))) {
                throw DomainError("vol" + idx + " must be > 0");
            }
            if (!(recovery_(i) > 0.0 && recovery_(i) < 1.0)) {
                throw DomainError("recovery" + idx + " must lie in (0, 1)");
            }
        }
        if (!std::isfinite(growth_rate_)) throw DomainError("growth_rate must be finite");
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
            throw DomainError("horizon must be > 0");
        }
    }

    Matrix liabilities_;
    Vector cash_;
    Vector drift_;
    Vector vol_;
    Vector recovery_;
    double growth_rate_;
    double horizon_;
};

// ============================================================================
// Obligations and relative liabilities
// ============================================================================

/// Total nominal obligation of each bank at time t (row sums of L(t)).
[[nodiscard]] inline Vector total_obligations(const FinancialNetwork& net, double t) {
    return net.liabilities_at(t).rowwise().sum();
}

namespace detail {

// Row-normalize; rows with zero total stay zero.
inline Matrix row_normalize(const Matrix& m) {
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double total = m.row(i).sum();
        if (total > 0.0) out.row(i) = m.row(i) / total;
    }
    return out;
}

}  // namespace detail

/// Pi(t): fraction of bank i's total debt owed to bank j. The uniform growth
/// factor cancels, so Pi is constant in t.
[[nodiscard]] inline Matrix relative_liabilities(const FinancialNetwork& net, double t) {
    net.check_time(t);
    return detail::row_normalize(net.liabilities());
}

// ============================================================================
// Clearing vector
// ============================================================================

struct ClearingResult {
    Vector payments;
    std::vector<bool> defaulted;
    Vector values;
    std::size_t iterations = 0;
    double residual = 0.0;
};

inline constexpr double kClearingTolerance = 1e-10;
inline constexpr std::size_t kClearingMaxIter = 10000;

/// Greatest clearing payment vector at time t, found by Picard iteration of
/// u -> min(ubar, Pi^T u + F) started from ubar. F is the cash vector.
[[nodiscard]] inline ClearingResult clearing_vector(const FinancialNetwork& net, double t,
                                                    double tol = kClearingTolerance,
                                                    std::size_t max_iter = kClearingMaxIter) {
    if (!(tol > 0.0)) throw DomainError("clearing tolerance must be > 0");
    if (max_iter < 1) throw DomainError("clearing max_iter must be >= 1");

    const Vector ubar = total_obligations(net, t);
    const Matrix pi_t = relative_liabilities(net, t).transpose();
    const Vector& inflow = net.cash();

    auto step = [&](const Vector& u) -> Vector {
        return ubar.cwiseMin(pi_t * u + inflow);
    };

    // Stop once u is a fixed point to within tol; the residual reported is
    // that of the returned iterate.
    Vector u = ubar;
    std::size_t iter = 0;
    double residual = 0.0;
    for (;;) {
        Vector next = step(u);
        ++iter;
        residual = (next - u).cwiseAbs().maxCoeff();
        if (residual <= tol) break;
        if (iter >= max_iter) {
            throw IterationLimitError("clearing iteration did not converge after " +
                                          std::to_string(iter) + " steps",
                                      std::move(next), residual);
        }
        u = std::move(next);
    }

    ClearingResult result;
    result.iterations = iter;
    result.residual = residual;
    result.values = (pi_t * u + inflow - ubar).cwiseMax(0.0);
    result.defaulted.resize(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        result.defaulted[i] = ubar(k) - u(k) > 1e-8 * std::max(1.0, ubar(k));
    }
    result.payments = std::move(u);
    return result;
}

/// L - diag(payments), using the time-0 liabilities.
[[nodiscard]] inline Matrix net_liability_matrix(const FinancialNetwork& net,
                                                 const Vector& payments) {
    if (static_cast<std::size_t>(payments.size()) != net.size()) {
        throw DomainError("payments must have one entry per bank");
    }
    Matrix out = net.liabilities();
    out.diagonal() -= payments;
    return out;
}

// ============================================================================
// Default boundaries
// ============================================================================

/// v^i(t) = R^i (ubar_i(t) - (Pi^T ubar(t))_i) before the horizon, and the
/// same net obligation without the recovery factor at t = T. Negative for net
/// creditors, which therefore cannot default.
[[nodiscard]] inline double default_boundary(const FinancialNetwork& net, std::size_t i,
                                             double t) {
    net.check_index(i);
    const Vector ubar = total_obligations(net, t);
    const Matrix pi = relative_liabilities(net, t);
    const auto k = static_cast<Eigen::Index>(i);
    const double net_obligation = ubar(k) - pi.col(k).dot(ubar);
    return t < net.horizon() ? net.recovery()(k) * net_obligation : net_obligation;
}

[[nodiscard]] inline Vector default_boundaries(const FinancialNetwork& net, double t) {
    Vector out(static_cast<Eigen::Index>(net.size()));
    for (std::size_t i = 0; i < net.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = default_boundary(net, i, t);
    }
    return out;
}

// ============================================================================
// Graph structure
// ============================================================================

struct GraphMatrices {
    Matrix incidence_in;   // n x m, 1 at the tail (debtor) of each edge
    Matrix incidence_out;  // n x m, 1 at the head (creditor) of each edge
    Matrix adjacency;      // adjacency_in + adjacency_out
    Matrix adjacency_in;   // (i, j) = 1 iff an edge runs i -> j
    Matrix adjacency_out;  // transpose of adjacency_in
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    [[nodiscard]] std::size_t edge_count() const noexcept { return edges.size(); }
};

/// One directed edge i -> j per positive liability L(i, j), enumerated in
/// row-major order.
[[nodiscard]] inline GraphMatrices build_graph_matrices(const FinancialNetwork& net) {
    const auto n = static_cast<Eigen::Index>(net.size());
    const Matrix& l = net.liabilities();

    GraphMatrices g;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (l(i, j) > 0.0) {
                g.edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }

    const auto m = static_cast<Eigen::Index>(g.edges.size());
    g.incidence_in = Matrix::Zero(n, m);
    g.incidence_out = Matrix::Zero(n, m);
    g.adjacency_in = Matrix::Zero(n, n);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto [from, to] = g.edges[static_cast<std::size_t>(e)];
        g.incidence_in(static_cast<Eigen::Index>(from), e) = 1.0;
        g.incidence_out(static_cast<Eigen::Index>(to), e) = 1.0;
        g.adjacency_in(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = 1.0;
    }
    g.adjacency_out = g.adjacency_in.transpose();
    g.adjacency = g.adjacency_in + g.adjacency_out;
    return g;
}

}  // namespace lolrnet
