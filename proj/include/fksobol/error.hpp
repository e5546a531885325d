#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fksobol {

enum class ErrorKind {
    invalid_argument,
    config,
    degenerate_variance,
    solver_divergence,
    mc_truncation,
    unsupported_model,
};

/// Base error for everything the library throws on a contract violation
/// or a numerical failure. `kind()` lets the CLI map failures to exit codes
/// and report tags without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history)
        : Error(ErrorKind::solver_divergence, what),
          history_(std::move(residual_history)) {}

    /// Relative residual norms, one per iteration.
    [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class TruncationError : public Error {
public:
    TruncationError(const std::string& what, std::size_t truncated_paths)
        : Error(ErrorKind::mc_truncation, what), count_(truncated_paths) {}

    [[nodiscard]] std::size_t truncated_paths() const noexcept { return count_; }

private:
    std::size_t count_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond) {
        fail(ErrorKind::invalid_argument, what);
    }
}

} // namespace fksobol
