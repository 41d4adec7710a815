// SPDX-License-Identifier: Apache-2.0
//
// Liability-weighted PageRank: edge weights scaled by the creditor's net
// position, column-vertex degree normalization, damped Google matrix and its
// Perron-Frobenius dominant vector. Ranks map to survival-probability targets
// through a QPolicy.
#pragma once

#include "lolrnet/core.hpp"
#include "lolrnet/network.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace lolrnet {

struct RankWeights {
    double c_plus = 0.0;   // weight on debts owed by i to j
    double c_minus = 1.0;  // weight on credits i holds against j
    double damping = 0.85;
    double epsilon = 0.0;  // added to every connected edge when > 0

    void validate() const {
        if (!(c_plus >= 0.0) || !(c_minus >= 0.0)) {
            throw DomainError("c_plus and c_minus must be non-negative");
        }
        if (std::abs(c_plus + c_minus - 1.0) > 1e-12) {
            throw DomainError("c_plus + c_minus must equal 1");
        }
        if (!(damping > 0.0 && damping < 1.0)) throw DomainError("damping must lie in (0, 1)");
        if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
    }

    friend bool operator==(const RankWeights&, const RankWeights&) = default;
};

struct EdgeWeights {
    Matrix plus;   // gamma+
    Matrix minus;  // gamma-, minus(i, j) == plus(j, i)
};

struct GoogleMatrix {
    Matrix tau;
    Matrix google;
};

struct PerronResult {
    double eigenvalue = 0.0;
    Vector rank;  // strictly positive, unit 2-norm
    double residual = 0.0;
    std::size_t iterations = 0;
};

struct SeriesResult {
    Vector raw;
    Vector normalized;
    std::size_t terms = 0;
};

struct RankingResult {
    Matrix gamma_plus;
    Matrix gamma_minus;
    Matrix tau;
    Matrix google;
    double eigenvalue = 0.0;
    Vector rank;
    Vector net_positions;
};

// ============================================================================
// Edge weights
// ============================================================================

/// N_j = X_j + (total owed to j) - (total owed by j).
[[nodiscard]] inline Vector net_positions(const FinancialNetwork& net) {
    const Matrix& l = net.liabilities();
    return net.cash() + l.colwise().sum().transpose() - l.rowwise().sum();
}

/// gamma+(i, j) = (c+ L(i,j) + c- L(j,i)) / (N_j - min(N) + 1), plus epsilon
/// on connected pairs.
[[nodiscard]] inline EdgeWeights edge_weights(const FinancialNetwork& net, const RankWeights& w) {
    w.validate();
    const Matrix& l = net.liabilities();
    const Vector positions = net_positions(net);
    const double floor = positions.minCoeff();
    const auto n = l.rows();

    EdgeWeights out;
    out.plus = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            double g = (w.c_plus * l(i, j) + w.c_minus * l(j, i)) / (positions(j) - floor + 1.0);
            if (w.epsilon > 0.0 && (l(i, j) > 0.0 || l(j, i) > 0.0)) g += w.epsilon;
            out.plus(i, j) = g;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(out.plus.row(i).sum() > 0.0)) {
            throw DegeneracyError("vertex " + std::to_string(i) +
                                      " has zero weighted outdegree; set epsilon > 0 or "
                                      "change (c_plus, c_minus)",
                                  static_cast<std::size_t>(i));
        }
    }
    out.minus = out.plus.transpose();
    return out;
}

// ============================================================================
// Google matrix
// ============================================================================

/// tau(i, j) = gamma+(i, j) / deg+(v_j), where deg+(v_j) is the row sum of
/// gamma+ at j. G = (1 - d)/n J + d tau.
[[nodiscard]] inline GoogleMatrix google_matrix(const Matrix& gamma_plus, double damping) {
    if (!(damping > 0.0 && damping < 1.0)) throw DomainError("damping must lie in (0, 1)");
    if (gamma_plus.rows() != gamma_plus.cols() || gamma_plus.rows() == 0) {
        throw DomainError("gamma+ must be a non-empty square matrix");
    }
    const auto n = gamma_plus.rows();
    const Vector outdegree = gamma_plus.rowwise().sum();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!(outdegree(j) > 0.0)) {
            throw DegeneracyError("vertex " + std::to_string(j) +
                                      " has zero weighted outdegree and cannot normalize",
                                  static_cast<std::size_t>(j));
        }
    }

    GoogleMatrix out;
    out.tau = gamma_plus * outdegree.cwiseInverse().asDiagonal();
    out.google = Matrix::Constant(n, n, (1.0 - damping) / static_cast<double>(n)) +
                 damping * out.tau;
    return out;
}

// ============================================================================
// Dominant vector
// ============================================================================

/// Power iteration with 2-norm renormalization. Requires a strictly positive
/// matrix so the Perron root is simple and dominant.
[[nodiscard]] inline PerronResult perron_rank(const Matrix& google, double tol = 1e-12,
                                              std::size_t max_iter = 100000) {
    if (google.rows() != google.cols() || google.rows() == 0) {
        throw DomainError("Google matrix must be a non-empty square matrix");
    }
    if (!(google.minCoeff() > 0.0)) throw DomainError("Google matrix must be strictly positive");
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");

    const auto n = google.rows();
    Vector x = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    PerronResult out;
    for (std::size_t iter = 1;; ++iter) {
        const Vector y = google * x;
        const double lambda = x.dot(y);
        const double residual = (y - lambda * x).norm();
        if (residual <= tol) {
            out.eigenvalue = lambda;
            out.rank = x;
            out.residual = residual;
            out.iterations = iter;
            return out;
        }
        if (iter >= max_iter) {
            throw IterationLimitError("power iteration did not converge", x, residual);
        }
        x = y / y.norm();
    }
}

/// R = d sum_k (1 - d)^k G^k 1, truncated once a term's max-norm drops to tol.
[[nodiscard]] inline SeriesResult series_rank(const Matrix& google, double damping,
                                              double tol = 1e-12,
                                              std::size_t max_terms = 100000) {
    if (!(damping > 0.0 && damping < 1.0)) throw DomainError("damping must lie in (0, 1)");
    const double radius = perron_rank(google).eigenvalue;
    if (!((1.0 - damping) * radius < 1.0)) {
        throw DomainError("series diverges: (1 - d) * spectral radius = " +
                          std::to_string((1.0 - damping) * radius) + " >= 1");
    }

    const auto n = google.rows();
    Vector term = Vector::Constant(n, damping);
    SeriesResult out;
    out.raw = Vector::Zero(n);
    for (std::size_t k = 0;; ++k) {
        out.raw += term;
        out.terms = k + 1;
        if (term.cwiseAbs().maxCoeff() <= tol) break;
        if (out.terms >= max_terms) {
            throw IterationLimitError("rank series did not converge", out.raw,
                                      term.cwiseAbs().maxCoeff());
        }
        term = (1.0 - damping) * (google * term);
    }
    out.normalized = out.raw / out.raw.norm();
    return out;
}

/// Edge weights, Google matrix and Perron vector in one pass.
[[nodiscard]] inline RankingResult rank_network(const FinancialNetwork& net, const RankWeights& w) {
    RankingResult out;
    out.net_positions = net_positions(net);
    auto gamma = edge_weights(net, w);
    auto gm = google_matrix(gamma.plus, w.damping);
    auto perron = perron_rank(gm.google);
    out.gamma_plus = std::move(gamma.plus);
    out.gamma_minus = std::move(gamma.minus);
    out.tau = std::move(gm.tau);
    out.google = std::move(gm.google);
    out.eigenvalue = perron.eigenvalue;
    out.rank = std::move(perron.rank);
    return out;
}

// ============================================================================
// Survival-probability policies
// ============================================================================

/// Same target for every bank (max-liquidity style).
struct UniformPolicy {
    double q = 0.9;

    friend bool operator==(const UniformPolicy&, const UniformPolicy&) = default;
};

struct ThresholdStep {
    double threshold = 0.0;
    double increment = 0.0;

    friend bool operator==(const ThresholdStep&, const ThresholdStep&) = default;
};

/// q = base + sum of increments whose threshold the rank strictly exceeds
/// (systemic-importance style).
struct RankThresholdPolicy {
    double base = 0.9;
    std::vector<ThresholdStep> steps;

    friend bool operator==(const RankThresholdPolicy&, const RankThresholdPolicy&) = default;
};

using QPolicy = std::variant<UniformPolicy, RankThresholdPolicy>;

inline void validate_policy(const QPolicy& policy) {
    if (const auto* u = std::get_if<UniformPolicy>(&policy)) {
        if (!(u->q >= 0.0 && u->q < 1.0)) throw DomainError("uniform q must lie in [0, 1)");
        return;
    }
    const auto& r = std::get<RankThresholdPolicy>(policy);
    if (!(r.base >= 0.0 && r.base < 1.0)) throw DomainError("policy base must lie in [0, 1)");
    double total = 0.0;
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        if (!(r.steps[k].increment >= 0.0)) {
            throw DomainError("policy increments must be non-negative");
        }
        if (k > 0 && r.steps[k].threshold < r.steps[k - 1].threshold) {
            throw DomainError("policy thresholds must be in ascending order");
        }
        total += r.steps[k].increment;
    }
    if (!(r.base + total < 1.0)) {
        throw DomainError("policy base + increments must stay below 1");
    }
}

[[nodiscard]] inline Vector assign_survival_probabilities(const Vector& rank,
                                                          const QPolicy& policy) {
    validate_policy(policy);
    Vector q(rank.size());
    if (const auto* u = std::get_if<UniformPolicy>(&policy)) {
        q.setConstant(u->q);
        return q;
    }
    const auto& r = std::get<RankThresholdPolicy>(policy);
    for (Eigen::Index i = 0; i < rank.size(); ++i) {
        // Increments are summed before adding the base so that e.g.
        // 0.9 + (0.05 + 0.04) lands on 0.99 exactly.
        double bump = 0.0;
        for (const auto& s : r.steps) {
            if (rank(i) > s.threshold) bump += s.increment;
        }
        q(i) = r.base + bump;
    }
    return q;
}

}  // namespace lolrnet
