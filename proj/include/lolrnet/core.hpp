// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lolrnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ============================================================================
// Error hierarchy
// ============================================================================

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of iterations. Carries the last iterate so the
/// caller can inspect how far it got.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, Vector last_iterate, double residual)
        : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    [[nodiscard]] const Vector& last_iterate() const noexcept { return last_iterate_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    Vector last_iterate_;
    double residual_;
};

/// A graph vertex has zero weighted degree where a normalizer is required.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, std::size_t vertex)
        : Error(what), vertex_(vertex) {}

    [[nodiscard]] std::size_t vertex() const noexcept { return vertex_; }

private:
    std::size_t vertex_;
};

}  // namespace lolrnet
