#pragma once

#include "sortwave/core.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sortwave {

/// Growth rate r, mutation diffusivity alpha and trait bound theta_max.
struct ModelParams {
    double r = 1.0;
    double alpha = 1.0;
    double theta_max = 1.0;

    /// Throws Error(invalid_argument) unless every field is finite and > 0.
    void validate() const;
};

inline constexpr std::size_t default_theta_nodes = 2001;

/// Discrete trait operator alpha*D2 + diag(theta_j*lambda^2 + r) with
/// reflected-ghost Neumann ends. The rows act on nodal values; the matrix is
/// self-adjoint for the trapezoid inner product.
TridiagonalSystem assemble_operator(const ModelParams& params, double lambda, const Grid1D& theta_grid);

/// Similarity transform W^{1/2} A W^{-1/2} with W the trapezoid weights;
/// turns the Neumann operator into a symmetric tridiagonal matrix.
TridiagonalSystem symmetrize(const TridiagonalSystem& op);

struct PowerIterationOptions {
    double eigen_tol = 1e-12;   // relative change of the eigenvalue between iterates
    double vector_tol = 1e-10;  // sup-norm change of the normalized iterate
    std::size_t max_iterations = 10000;
};

struct PrincipalMode {
    double mu0 = 0.0;
    std::vector<double> q;  // positive, trapezoid(q) = 1
    std::size_t iterations = 0;
    double residual = 0.0;  // ||A q - mu0 q||_inf
};

/// Perron eigenpair of the trait operator by shifted inverse iteration on
/// (sigma I - A), sigma = r + theta_max*lambda^2 + 1.
PrincipalMode principal_mode(const ModelParams& params, double lambda, const Grid1D& theta_grid,
                             const PowerIterationOptions& options = {});

/// Exponential-edge mode: decay lambda < 0, speed c(lambda) = mu0/|lambda|,
/// edge distribution Q and the two diagnostics built from it.
struct DispersionMode {
    double lambda = 0.0;
    double speed = 0.0;
    double mu0 = 0.0;
    Grid1D theta_grid{0.0, 1.0, 3};
    std::vector<double> q;
    double mean_theta_edge = 0.0;
    double fisher_term = 0.0;  // alpha/(theta_max*lambda^2) * int |Q'/Q|^2
    std::size_t iterations = 0;
};

DispersionMode dispersion_mode(const ModelParams& params, double lambda, const Grid1D& theta_grid,
                               const PowerIterationOptions& options = {});

/// c(lambda) on the default 2001-node trait grid.
double wave_speed(const ModelParams& params, double lambda, std::size_t theta_nodes = default_theta_nodes);

/// c(lambda) for every entry of `lambdas`, evaluated as an independent parallel map.
std::vector<double> speed_scan(const ModelParams& params, std::span<const double> lambdas,
                               std::size_t theta_nodes = default_theta_nodes);

struct MinimalSpeedOptions {
    std::size_t theta_nodes = default_theta_nodes;
    double lambda_rel_tol = 1e-8;
    std::size_t max_expansions = 5;
    double expansion_factor = 4.0;
    double bracket_factor = 8.0;  // start on [-f, -1/f] * sqrt(r/theta_max)
};

struct MinimalSpeedResult {
    double c_star = 0.0;
    double lambda_star = 0.0;
    DispersionMode mode_star;
    double bracket_low = 0.0;   // sqrt(2 r theta_max)
    double bracket_high = 0.0;  // 2 sqrt(r theta_max)
    double derivative = 0.0;    // centered-difference c'(lambda_star)
    std::size_t evaluations = 0;
};

/// Golden-section minimum of c over lambda < 0 with an expanding bracket.
MinimalSpeedResult minimal_speed(const ModelParams& params, const MinimalSpeedOptions& options = {});

struct EdgeDiagnostics {
    double mean_theta_edge = 0.0;
    double fisher_term = 0.0;
    /// lambda*c + lambda^2 <theta>_edge + r
    double integrated_identity_residual = 0.0;
    /// <theta>_edge - (theta_max/2 + fisher_term)
    double mean_theta_identity_residual = 0.0;

    // Filled only when the mode is the speed minimizer.
    std::optional<double> weighted_q = {};        // int Q*^2
    std::optional<double> weighted_theta_q = {};  // int theta Q*^2
    std::optional<double> cstar_residual = {};    // c* + 2 lambda* <theta Q*>/<Q*>
    std::optional<double> cstar_squared_formula = {};
    std::optional<double> cstar_squared_residual = {};
    std::optional<double> kpp_speed_squared = {};  // 4 r <theta>_edge
    std::optional<bool> kpp_underestimates = {};
};

/// Diagnostic identities for a converged mode. Throws Error(invalid_mode) if
/// any entry of q is not strictly positive.
EdgeDiagnostics edge_diagnostics(const DispersionMode& mode, const ModelParams& params, bool is_minimizer = false);

}  // namespace sortwave
