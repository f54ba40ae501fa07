#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sortwave {

/// Failure categories raised by the solvers. The textual name is what the CLI
/// prints and what callers match on.
enum class ErrorKind {
    invalid_argument,
    singular_system,
    non_convergence,
    bracket_failure,
    invalid_mode,
    positivity_violated,
    domain_exhausted,
    front_not_in_domain,
    too_few_points,
    outside_support,
    left_domain,
    cfl_violation,
    selection_at_boundary,
    oracle_degenerate,
    gradient_blow_up,
};

constexpr std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::singular_system: return "singular system";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::bracket_failure: return "bracket expansion failure";
    case ErrorKind::invalid_mode: return "invalid mode";
    case ErrorKind::positivity_violated: return "positivity violated";
    case ErrorKind::domain_exhausted: return "domain exhausted";
    case ErrorKind::front_not_in_domain: return "front not in domain";
    case ErrorKind::too_few_points: return "too few points";
    case ErrorKind::outside_support: return "outside support";
    case ErrorKind::left_domain: return "left domain";
    case ErrorKind::cfl_violation: return "CFL violation";
    case ErrorKind::selection_at_boundary: return "selection at boundary";
    case ErrorKind::oracle_degenerate: return "oracle degenerate";
    case ErrorKind::gradient_blow_up: return "gradient blow-up";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(error_name(kind)) + (detail.empty() ? "" : ": " + detail))
        , kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace sortwave
