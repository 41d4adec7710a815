// SPDX-License-Identifier: Apache-2.0
#include "lolrnet/network.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lolrnet;
using namespace lolrnet::test;

// ---------------------------------------------------------------------------
// FinancialNetwork invariants
// ---------------------------------------------------------------------------

TEST(FinancialNetwork, RejectsInvalidInputs) {
    const Matrix l = Matrix::Zero(2, 2);
    const Vector ok = Vector::Constant(2, 1.0);
    const Vector rec = Vector::Constant(2, 0.5);
    Matrix diag = l;
    diag(0, 0) = 1.0;
    EXPECT_THROW(FinancialNetwork(diag, ok, ok, ok, rec, 0.0, 1.0), DomainError);
    Matrix neg = l;
    neg(0, 1) = -1.0;
    EXPECT_THROW(FinancialNetwork(neg, ok, ok, ok, rec, 0.0, 1.0), DomainError);
    EXPECT_THROW(FinancialNetwork(l, -ok, ok, ok, rec, 0.0, 1.0), DomainError);
    EXPECT_THROW(FinancialNetwork(l, ok, ok, Vector::Zero(2), rec, 0.0, 1.0), DomainError);
    EXPECT_THROW(FinancialNetwork(l, ok, ok, ok, Vector::Constant(2, 1.0), 0.0, 1.0), DomainError);
    EXPECT_THROW(FinancialNetwork(l, ok, ok, ok, rec, 0.0, 0.0), DomainError);
    EXPECT_THROW(FinancialNetwork(Matrix::Zero(3, 3), ok, ok, ok, rec, 0.0, 1.0), DomainError);
    EXPECT_NO_THROW(FinancialNetwork(l, ok, ok, ok, rec, 0.0, 1.0));
}

// ---------------------------------------------------------------------------
// total_obligations
// ---------------------------------------------------------------------------

TEST(TotalObligations, ZeroLiabilitiesGiveZero) {
    const auto net = simple_network(Matrix::Zero(3, 3), Vector::Ones(3), 0.05);
    EXPECT_EQ(total_obligations(net, 0.7), Vector::Zero(3));
}

TEST(TotalObligations, CaseStudyBank3GrowsExponentially) {
    const auto net = case_study();
    const Vector u = total_obligations(net, 1.0);
    EXPECT_NEAR(u(2), 15.0 * std::exp(0.08), 1e-12);
    EXPECT_NEAR(u(2), 16.2493, 1e-4);
}

TEST(TotalObligations, ZeroGrowthIsConstantInTime) {
    const auto net = simple_network(reference_liabilities(), case_cash(), 0.0);
    EXPECT_EQ(total_obligations(net, 0.0), total_obligations(net, 1.0));
    EXPECT_EQ(total_obligations(net, 0.3), total_obligations(net, 0.9));
}

TEST(TotalObligations, TimeOutsideHorizonIsDomainError) {
    const auto net = case_study();
    EXPECT_THROW((void)total_obligations(net, -0.01), DomainError);
    EXPECT_THROW((void)total_obligations(net, 1.01), DomainError);
}

// ---------------------------------------------------------------------------
// relative_liabilities
// ---------------------------------------------------------------------------

TEST(RelativeLiabilities, ZeroLiabilitiesGiveZeroMatrix) {
    const auto net = simple_network(Matrix::Zero(3, 3), Vector::Ones(3));
    EXPECT_EQ(relative_liabilities(net, 0.0), Matrix::Zero(3, 3));
}

TEST(RelativeLiabilities, CaseStudyBank1Row) {
    const Matrix pi = relative_liabilities(case_study(), 0.0);
    EXPECT_DOUBLE_EQ(pi(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(pi(0, 1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(pi(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(pi(0, 3), 2.0 / 3.0);
}

TEST(RelativeLiabilities, IndependentOfTimeUnderUniformGrowth) {
    const auto net = case_study();
    EXPECT_TRUE(relative_liabilities(net, 0.0).isApprox(relative_liabilities(net, 1.0), 1e-15));
}

TEST(RelativeLiabilities, RowsSumToOneOrZero) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        const auto net = simple_network(random_liabilities(rng, n, 0.4), Vector::Ones(n), 0.03);
        const Matrix pi = relative_liabilities(net, 0.5);
        const Vector ubar = total_obligations(net, 0.5);
        for (int i = 0; i < n; ++i) {
            const double expected = ubar(i) > 0.0 ? 1.0 : 0.0;
            EXPECT_NEAR(pi.row(i).sum(), expected, 1e-12);
        }
    }
}

// ---------------------------------------------------------------------------
// clearing_vector
// ---------------------------------------------------------------------------

TEST(ClearingVector, MutualDebtsWithInflowPayInFull) {
    Matrix l(2, 2);
    l << 0, 1, 1, 0;
    const auto res = clearing_vector(simple_network(l, Vector::Constant(2, 0.5)), 0.0);
    EXPECT_NEAR(res.payments(0), 1.0, 1e-12);
    EXPECT_NEAR(res.payments(1), 1.0, 1e-12);
    EXPECT_FALSE(res.defaulted[0]);
    EXPECT_FALSE(res.defaulted[1]);
}

TEST(ClearingVector, NoInflowMeansNothingPayable) {
    Matrix l(2, 2);
    l << 0, 1, 0, 0;
    const auto res = clearing_vector(simple_network(l, Vector::Zero(2)), 0.0);
    EXPECT_NEAR(res.payments(0), 0.0, 1e-12);
    EXPECT_NEAR(res.payments(1), 0.0, 1e-12);
    EXPECT_TRUE(res.defaulted[0]);
    EXPECT_FALSE(res.defaulted[1]);  // owes nothing, cannot default
    EXPECT_EQ(res.values, Vector::Zero(2));
}

TEST(ClearingVector, FullPaymentWhenInflowCoversObligations) {
    const Matrix l = reference_liabilities().transpose();
    const Vector ubar = l.rowwise().sum();
    const auto net = simple_network(l, ubar + Vector::Constant(4, 0.25));
    const auto res = clearing_vector(net, 0.0);
    EXPECT_TRUE(res.payments.isApprox(ubar, 1e-12));
    const Vector expected = net.cash() + relative_liabilities(net, 0.0).transpose() * ubar - ubar;
    EXPECT_TRUE(res.values.isApprox(expected, 1e-12));
    EXPECT_TRUE((res.values.array() >= 0.0).all());
    for (bool d : res.defaulted) EXPECT_FALSE(d);
}

TEST(ClearingVector, RejectsBadSolverSettings) {
    const auto net = case_study();
    EXPECT_THROW((void)clearing_vector(net, 0.0, 0.0), DomainError);
    EXPECT_THROW((void)clearing_vector(net, 0.0, 1e-10, 0), DomainError);
}

TEST(ClearingVector, IterationLimitCarriesLastIterate) {
    // No inflow and a leak to a sink: payments decay geometrically to zero.
    Matrix l = Matrix::Zero(3, 3);
    l(0, 1) = l(1, 0) = l(1, 2) = 1.0;
    const auto net = simple_network(l, Vector::Zero(3));
    try {
        (void)clearing_vector(net, 0.0, 1e-14, 1);
        FAIL() << "expected IterationLimitError";
    } catch (const IterationLimitError& e) {
        EXPECT_EQ(e.last_iterate().size(), 3);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(ClearingVector, PicardFromObligationsIsNonIncreasing) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 5;
        std::uniform_real_distribution<double> cash(0.0, 4.0);
        Vector f(n);
        for (int i = 0; i < n; ++i) f(i) = cash(rng);
        const auto net = simple_network(random_liabilities(rng, n), f);
        Vector previous = total_obligations(net, 0.0);
        for (std::size_t k = 1; k <= 40; ++k) {
            Vector current;
            try {
                current = clearing_vector(net, 0.0, 1e-300, k).payments;
            } catch (const IterationLimitError& e) {
                current = e.last_iterate();
            }
            EXPECT_TRUE((current.array() <= previous.array() + 1e-15).all()) << "step " << k;
            previous = current;
        }
    }
}

namespace {

std::vector<std::vector<double>> to_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
}

}  // namespace

// Property suite: lattice bounds, agreement with a double-start brute-force
// oracle, and monotonicity in the inflow, over 200 random networks.
TEST(ClearingVector, PropertySuiteAgainstDoubleStartOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> cash(0.0, 6.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        const Matrix l = random_liabilities(rng, n);
        Vector f(n);
        for (int i = 0; i < n; ++i) f(i) = cash(rng);
        const auto net = simple_network(l, f);
        const auto res = clearing_vector(net, 0.0);
        const Vector ubar = total_obligations(net, 0.0);

        EXPECT_TRUE((res.payments.array() >= -1e-12).all());
        EXPECT_TRUE((res.payments.array() <= ubar.array() + 1e-12).all());
        const Vector mapped = ubar.cwiseMin(relative_liabilities(net, 0.0).transpose() *
                                                res.payments + f);
        EXPECT_LE((res.payments - mapped).cwiseAbs().maxCoeff(), kClearingTolerance);

        const auto rows = to_rows(l);
        const std::vector<double> inflow(f.data(), f.data() + n);
        const std::vector<double> from_top(ubar.data(), ubar.data() + n);
        const auto top = brute_force_clearing(rows, inflow, from_top);
        const auto bottom = brute_force_clearing(rows, inflow, std::vector<double>(n, 0.0));
        bool unique = true;
        for (int i = 0; i < n; ++i) unique = unique && std::abs(top[i] - bottom[i]) < 1e-7;
        for (int i = 0; i < n; ++i) {
            // On non-unique fixed points the library reports the greatest one.
            EXPECT_NEAR(res.payments(i), top[i], 1e-7) << "trial " << trial << " unique " << unique;
        }

        // Raising every inflow never lowers any payment.
        Vector f_up = f;
        std::uniform_real_distribution<double> bump(0.0, 2.0);
        for (int i = 0; i < n; ++i) f_up(i) += bump(rng);
        const auto up = clearing_vector(simple_network(l, f_up), 0.0);
        EXPECT_TRUE((up.payments.array() >= res.payments.array() - 1e-9).all());
    }
}

TEST(ClearingVector, DefaultFlagMatchesShortfall) {
    const auto res = clearing_vector(case_study(), 1.0);
    const Vector ubar = total_obligations(case_study(), 1.0);
    for (int i = 0; i < 4; ++i) {
        const bool shortfall = ubar(i) - res.payments(i) > 1e-8 * std::max(1.0, ubar(i));
        EXPECT_EQ(res.defaulted[i], shortfall);
    }
}

// ---------------------------------------------------------------------------
// net_liability_matrix
// ---------------------------------------------------------------------------

TEST(NetLiabilityMatrix, ZeroPaymentsLeaveLiabilities) {
    const auto net = case_study();
    EXPECT_EQ(net_liability_matrix(net, Vector::Zero(4)), net.liabilities());
}

TEST(NetLiabilityMatrix, FullPaymentsBalanceRows) {
    const auto net = case_study();
    const Matrix lt = net_liability_matrix(net, net.liabilities().rowwise().sum());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(lt.row(i).sum(), 0.0, 1e-12);
}

TEST(NetLiabilityMatrix, CaseStudyBank2Diagonal) {
    const auto net = case_study();
    Vector pay = Vector::Zero(4);
    pay(1) = 4.0;
    const Matrix lt = net_liability_matrix(net, pay);
    EXPECT_DOUBLE_EQ(lt(1, 1), -4.0);
    EXPECT_DOUBLE_EQ(lt(1, 3), 4.0);
    EXPECT_THROW((void)net_liability_matrix(net, Vector::Zero(3)), DomainError);
}

// ---------------------------------------------------------------------------
// default_boundary
// ---------------------------------------------------------------------------

TEST(DefaultBoundary, CaseStudyTerminalValues) {
    const auto net = case_study();
    EXPECT_NEAR(default_boundary(net, 2, 1.0), 15.0 * std::exp(0.08), 1e-12);
    EXPECT_NEAR(default_boundary(net, 2, 1.0), 16.2493, 1e-4);
    EXPECT_NEAR(default_boundary(net, 0, 1.0), 5.0 * std::exp(0.08), 1e-12);
    EXPECT_NEAR(default_boundary(net, 0, 1.0), 5.4164, 1e-4);
    // Net creditors have negative boundaries.
    EXPECT_LT(default_boundary(net, 1, 1.0), 0.0);
    EXPECT_LT(default_boundary(net, 3, 1.0), 0.0);
}

TEST(DefaultBoundary, RecoveryScalesBeforeHorizon) {
    const Matrix l = reference_liabilities().transpose();
    const auto half = simple_network(l, case_cash(), kGrowth, 0.5);
    const auto quarter = simple_network(l, case_cash(), kGrowth, 0.25);
    for (std::size_t i = 0; i < 4; ++i) {
        const double t = 0.4;
        const double full = total_obligations(half, t)(i) -
                            relative_liabilities(half, t).col(i).dot(total_obligations(half, t));
        EXPECT_NEAR(default_boundary(half, i, t), 0.5 * full, 1e-12);
        EXPECT_NEAR(default_boundary(quarter, i, t), 0.5 * default_boundary(half, i, t), 1e-12);
    }
}

TEST(DefaultBoundary, ContinuousBeforeHorizon) {
    const auto net = case_study();
    for (double t = 0.0; t < 0.99; t += 0.05) {
        const double a = default_boundary(net, 0, t);
        const double b = default_boundary(net, 0, t + 1e-9);
        EXPECT_NEAR(a, b, 1e-7);
    }
}

TEST(DefaultBoundary, IndexAndTimeChecked) {
    const auto net = case_study();
    EXPECT_THROW((void)default_boundary(net, 4, 0.5), IndexError);
    EXPECT_THROW((void)default_boundary(net, 0, 1.5), DomainError);
}

// ---------------------------------------------------------------------------
// build_graph_matrices
// ---------------------------------------------------------------------------

TEST(GraphMatrices, ZeroLiabilitiesHaveNoEdges) {
    const auto g = build_graph_matrices(simple_network(Matrix::Zero(3, 3), Vector::Ones(3)));
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(g.incidence_in.cols(), 0);
    EXPECT_EQ(g.adjacency, Matrix::Zero(3, 3));
}

TEST(GraphMatrices, CaseStudyHasSixEdges) {
    const auto g = build_graph_matrices(case_study());
    EXPECT_EQ(g.edge_count(), 6u);
    EXPECT_EQ(g.incidence_in.cols(), 6);
}

TEST(GraphMatrices, SingleLiabilityIsSymmetricInAdjacency) {
    Matrix l = Matrix::Zero(3, 3);
    l(0, 1) = 2.0;
    const auto g = build_graph_matrices(simple_network(l, Vector::Ones(3)));
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 1) = expected(1, 0) = 1.0;
    EXPECT_EQ(g.adjacency, expected);
    EXPECT_EQ(g.adjacency_in(0, 1), 1.0);
    EXPECT_EQ(g.incidence_in(0, 0), 1.0);
    EXPECT_EQ(g.incidence_out(1, 0), 1.0);
}

TEST(GraphMatrices, StructuralInvariantsOnRandomNetworks) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 6;
        const auto g = build_graph_matrices(simple_network(random_liabilities(rng, n), Vector::Ones(n)));
        EXPECT_EQ(g.adjacency, g.adjacency.transpose());
        EXPECT_EQ(g.adjacency.diagonal(), Vector::Zero(n));
        EXPECT_EQ(g.adjacency_in.transpose(), g.adjacency_out);
        EXPECT_EQ(g.adjacency, g.adjacency_in + g.adjacency_out);
        for (Eigen::Index e = 0; e < g.incidence_in.cols(); ++e) {
            EXPECT_EQ(g.incidence_in.col(e).sum(), 1.0);
            EXPECT_EQ(g.incidence_out.col(e).sum(), 1.0);
        }
    }
}
