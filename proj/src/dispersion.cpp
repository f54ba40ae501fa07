#include "sortwave/dispersion.hpp"

#include "sortwave/error.hpp"
#include "sortwave/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sortwave {

void ModelParams::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw Error(ErrorKind::invalid_argument, std::string(name) + " must be finite and positive");
        }
    };
    check(r, "r");
    check(alpha, "alpha");
    check(theta_max, "theta_max");
}

TridiagonalSystem assemble_operator(const ModelParams& params, double lambda, const Grid1D& theta_grid) {
    const std::size_t n = theta_grid.size();
    const double h = theta_grid.spacing();
    const double k = params.alpha / (h * h);
    const double lambda_sq = lambda * lambda;

    TridiagonalSystem op;
    op.diag.resize(n);
    op.sub.assign(n - 1, k);
    op.sup.assign(n - 1, k);
    for (std::size_t j = 0; j < n; ++j) {
        op.diag[j] = -2.0 * k + theta_grid.node(j) * lambda_sq + params.r;
    }
    // reflected ghosts Q_{-1} = Q_1, Q_{n} = Q_{n-2}
    op.sup.front() = 2.0 * k;
    op.sub.back() = 2.0 * k;
    return op;
}

TridiagonalSystem symmetrize(const TridiagonalSystem& op) {
    TridiagonalSystem sym = op;
    const double s = std::sqrt(0.5);
    // S_ij = sqrt(w_i) A_ij / sqrt(w_j); only the two end couplings change.
    sym.sup.front() = op.sup.front() * s;
    sym.sub.front() = op.sub.front() / s;
    sym.sub.back() = op.sub.back() * s;
    sym.sup.back() = op.sup.back() / s;
    return sym;
}

namespace {

double weighted_dot(std::span<const double> a, std::span<const double> b, std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += w[j] * a[j] * b[j];
    return acc;
}

double fisher_integral(std::span<const double> q, double h) {
    const std::size_t n = q.size();
    std::vector<double> logq(n);
    for (std::size_t j = 0; j < n; ++j) logq[j] = std::log(q[j]);
    std::vector<double> sq(n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double d = (logq[j + 1] - logq[j - 1]) / (2.0 * h);
        sq[j] = d * d;
    }
    const double d0 = (4.0 * (logq[1] - logq[0]) - (logq[2] - logq[0])) / (2.0 * h);  // exact 0 on constants
    const double dn = (4.0 * (logq[n - 1] - logq[n - 2]) - (logq[n - 1] - logq[n - 3])) / (2.0 * h);
    sq[0] = d0 * d0;
    sq[n - 1] = dn * dn;
    return trapezoid(sq, h);
}

// Solves (sigma I - A) y = b in place. sigma I - A is an M-matrix whose row
// sums equal `excess` (all >= 1); eliminating on the excesses instead of the
// pivots keeps every operation a sum of positive terms, so y is accurate
// componentwise even though the off-diagonals are O(alpha/h^2).
struct ShiftedSolver {
    std::vector<double> lower;  // |A_{i,i-1}|
    std::vector<double> upper;  // |A_{i,i+1}|
    std::vector<double> pivot;
    std::vector<double> ratio;  // upper / pivot

    ShiftedSolver(const TridiagonalSystem& op, double sigma) {
        const std::size_t n = op.size();
        lower.assign(n, 0.0);
        upper.assign(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) lower[i] = op.sub[i - 1];
        for (std::size_t i = 0; i + 1 < n; ++i) upper[i] = op.sup[i];
        pivot.resize(n);
        ratio.resize(n);
        double prev_excess = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // diagonal of A is -(lower + upper) + potential
            const double potential = op.diag[i] + lower[i] + upper[i];
            const double row_excess = sigma - potential;
            const double excess =
                i == 0 ? row_excess : row_excess + lower[i] * prev_excess / (upper[i - 1] + prev_excess);
            pivot[i] = upper[i] + excess;
            ratio[i] = upper[i] / pivot[i];
            prev_excess = excess;
        }
    }

    void solve(std::span<double> b) const {
        const std::size_t n = pivot.size();
        b[0] /= pivot[0];
        for (std::size_t i = 1; i < n; ++i) b[i] = (b[i] + lower[i] * b[i - 1]) / pivot[i];
        for (std::size_t i = n - 1; i-- > 0;) b[i] += ratio[i] * b[i + 1];
    }
};

}  // namespace

PrincipalMode principal_mode(const ModelParams& params, double lambda, const Grid1D& theta_grid,
                             const PowerIterationOptions& options) {
    params.validate();
    if (!(lambda < 0.0)) throw Error(ErrorKind::invalid_argument, "decay rate lambda must be negative");

    const std::size_t n = theta_grid.size();
    const double h = theta_grid.spacing();
    const TridiagonalSystem op = assemble_operator(params, lambda, theta_grid);
    const double sigma = params.r + params.theta_max * lambda * lambda + 1.0;

    const ShiftedSolver shifted(op, sigma);
    const std::vector<double> w = trapezoid_weights(n, h);

    std::vector<double> q(n, 1.0 / (theta_grid.hi() - theta_grid.lo()));
    std::vector<double> y(n);
    double mu = params.r;
    bool eigen_done = false;
    bool vector_done = false;
    std::size_t it = 0;
    while (it < options.max_iterations) {
        ++it;
        std::copy(q.begin(), q.end(), y.begin());
        shifted.solve(y);
        const double nu = weighted_dot(q, y, w) / weighted_dot(q, q, w);
        const double mu_next = sigma - 1.0 / nu;

        double mass = trapezoid(y, h);
        if (mass < 0.0) {
            for (double& v : y) v = -v;
            mass = -mass;
        }
        double change = 0.0;
        double peak = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = y[j] / mass;
            change = std::max(change, std::abs(v - q[j]));
            peak = std::max(peak, std::abs(v));
            q[j] = v;
        }
        eigen_done = std::abs(mu_next - mu) <= options.eigen_tol * std::max(1.0, std::abs(mu_next));
        vector_done = change <= options.vector_tol * peak;
        mu = mu_next;
        if (eigen_done && vector_done) break;
    }
    if (!(eigen_done && vector_done)) {
        throw Error(ErrorKind::non_convergence,
                    "inverse iteration stalled after " + std::to_string(it) + " iterations");
    }

    PrincipalMode mode;
    mode.mu0 = mu;
    mode.iterations = it;
    const std::vector<double> aq = op.multiply(q);
    for (std::size_t j = 0; j < n; ++j) mode.residual = std::max(mode.residual, std::abs(aq[j] - mu * q[j]));
    mode.q = std::move(q);
    return mode;
}

DispersionMode dispersion_mode(const ModelParams& params, double lambda, const Grid1D& theta_grid,
                               const PowerIterationOptions& options) {
    PrincipalMode pm = principal_mode(params, lambda, theta_grid, options);
    DispersionMode mode;
    mode.lambda = lambda;
    mode.mu0 = pm.mu0;
    mode.speed = pm.mu0 / std::abs(lambda);
    mode.theta_grid = theta_grid;
    mode.iterations = pm.iterations;
    mode.q = std::move(pm.q);

    const std::size_t n = theta_grid.size();
    const double h = theta_grid.spacing();
    std::vector<double> theta_q(n);
    for (std::size_t j = 0; j < n; ++j) theta_q[j] = theta_grid.node(j) * mode.q[j];
    mode.mean_theta_edge = trapezoid(theta_q, h);
    if (std::all_of(mode.q.begin(), mode.q.end(), [](double v) { return v > 0.0; })) {
        mode.fisher_term = params.alpha / (params.theta_max * lambda * lambda) * fisher_integral(mode.q, h);
    }
    return mode;
}

double wave_speed(const ModelParams& params, double lambda, std::size_t theta_nodes) {
    const Grid1D grid(0.0, params.theta_max, theta_nodes);
    return principal_mode(params, lambda, grid).mu0 / std::abs(lambda);
}

std::vector<double> speed_scan(const ModelParams& params, std::span<const double> lambdas, std::size_t theta_nodes) {
    params.validate();
    std::vector<double> out(lambdas.size());
    const Grid1D grid(0.0, params.theta_max, theta_nodes);
    parallel_for(lambdas.size(), [&](std::size_t i) {
        out[i] = principal_mode(params, lambdas[i], grid).mu0 / std::abs(lambdas[i]);
    });
    return out;
}

MinimalSpeedResult minimal_speed(const ModelParams& params, const MinimalSpeedOptions& options) {
    params.validate();
    const Grid1D grid(0.0, params.theta_max, options.theta_nodes);
    const double scale = std::sqrt(params.r / params.theta_max);
    std::size_t evaluations = 0;
    auto speed = [&](double lambda) {
        ++evaluations;
        return principal_mode(params, lambda, grid).mu0 / std::abs(lambda);
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    if (!(options.bracket_factor > 1.0)) throw Error(ErrorKind::invalid_argument, "bracket_factor must exceed 1");
    double left = -options.bracket_factor * scale;   // steepest decay
    double right = -scale / options.bracket_factor;  // shallowest decay
    double lambda_star = 0.0;
    bool interior = false;
    for (std::size_t expansion = 0; expansion <= options.max_expansions; ++expansion) {
        double a = left;
        double b = right;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = speed(x1);
        double f2 = speed(x2);
        while ((b - a) > options.lambda_rel_tol * std::abs(0.5 * (a + b))) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = speed(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = speed(x2);
            }
        }
        lambda_star = 0.5 * (a + b);
        const double margin = 1e-3 * (right - left);
        if (lambda_star - left < margin) {
            left *= options.expansion_factor;
        } else if (right - lambda_star < margin) {
            right /= options.expansion_factor;
        } else {
            interior = true;
            break;
        }
    }
    if (!interior) {
        throw Error(ErrorKind::bracket_failure, "minimum still at the bracket boundary after " +
                                                    std::to_string(options.max_expansions) + " expansions");
    }

    MinimalSpeedResult result;
    result.mode_star = dispersion_mode(params, lambda_star, grid);
    result.lambda_star = lambda_star;
    result.c_star = result.mode_star.speed;
    result.bracket_low = std::sqrt(2.0 * params.r * params.theta_max);
    result.bracket_high = 2.0 * std::sqrt(params.r * params.theta_max);
    const double step = 1e-4 * std::abs(lambda_star);
    result.derivative = (speed(lambda_star + step) - speed(lambda_star - step)) / (2.0 * step);
    result.evaluations = evaluations + 1;
    return result;
}

EdgeDiagnostics edge_diagnostics(const DispersionMode& mode, const ModelParams& params, bool is_minimizer) {
    if (mode.q.size() != mode.theta_grid.size() ||
        !std::all_of(mode.q.begin(), mode.q.end(), [](double v) { return v > 0.0 && std::isfinite(v); })) {
        throw Error(ErrorKind::invalid_mode, "edge distribution must be strictly positive");
    }
    const Grid1D& grid = mode.theta_grid;
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double lambda = mode.lambda;

    std::vector<double> theta_q(n);
    for (std::size_t j = 0; j < n; ++j) theta_q[j] = grid.node(j) * mode.q[j];

    EdgeDiagnostics d;
    d.mean_theta_edge = trapezoid(theta_q, h);
    d.fisher_term = lambda == 0.0 ? 0.0
                                  : params.alpha / (params.theta_max * lambda * lambda) * fisher_integral(mode.q, h);
    d.integrated_identity_residual = lambda * mode.speed + lambda * lambda * d.mean_theta_edge + params.r;
    d.mean_theta_identity_residual = d.mean_theta_edge - (0.5 * params.theta_max + d.fisher_term);

    if (is_minimizer) {
        std::vector<double> q_sq(n), theta_q_sq(n);
        for (std::size_t j = 0; j < n; ++j) {
            q_sq[j] = mode.q[j] * mode.q[j];
            theta_q_sq[j] = grid.node(j) * q_sq[j];
        }
        const double wq = trapezoid(q_sq, h);
        const double wtq = trapezoid(theta_q_sq, h);
        const double m = d.mean_theta_edge;
        const double ratio = 1.0 - m * wq / wtq;
        const double formula = 4.0 * params.r * m / (1.0 - ratio * ratio);
        d.weighted_q = wq;
        d.weighted_theta_q = wtq;
        d.cstar_residual = mode.speed + 2.0 * lambda * wtq / wq;
        d.cstar_squared_formula = formula;
        d.cstar_squared_residual = mode.speed * mode.speed - formula;
        d.kpp_speed_squared = 4.0 * params.r * m;
        d.kpp_underestimates = mode.speed * mode.speed > 4.0 * params.r * m;
    }
    return d;
}

}  // namespace sortwave
