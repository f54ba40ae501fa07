#include "sortwave/canonical.hpp"

#include "sortwave/error.hpp"
#include "sortwave/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sortwave {

namespace {

constexpr double degeneracy_floor = -1e-12;

PhaseDerivatives checked(const PhaseOracle& oracle, double t, double x, double theta) {
    const PhaseDerivatives d = oracle(t, x, theta);
    if (!(d.d2u_dthetatheta < degeneracy_floor)) {
        throw Error(ErrorKind::oracle_degenerate, "u_thetatheta = " + std::to_string(d.d2u_dthetatheta) +
                                                      " at x=" + std::to_string(x));
    }
    return d;
}

double max_abs_gradient(std::span<const double> v, double h) {
    double g = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) g = std::max(g, std::abs(v[i + 1] - v[i]) / h);
    return g;
}

}  // namespace

PhaseOracle explicit_phase_oracle(const PhaseParams& params) {
    params.validate();
    return [params](double t, double x, double theta) {
        const PhaseGradient g = phase_gradient(t, x, theta, params);
        return PhaseDerivatives{g.u, g.du_dx, g.d2u_dthetatheta};
    };
}

PhaseOracle uniform_phase_oracle(double g, double m) {
    return [g, m](double, double, double) { return PhaseDerivatives{0.0, -g, -m}; };
}

double explicit_selected_trait(double x, const PhaseParams& params) {
    return 0.25 * params.alpha * std::cbrt(std::pow(6.0 * std::abs(x) / params.alpha, 2.0));
}

double selected_trait(std::span<const double> u_slice, const Grid1D& grid_theta) {
    if (u_slice.size() != grid_theta.size()) {
        throw Error(ErrorKind::invalid_argument, "slice size does not match the trait grid");
    }
    const auto it = std::max_element(u_slice.begin(), u_slice.end());
    const auto k = static_cast<std::size_t>(std::distance(u_slice.begin(), it));
    if (k == 0 || k + 1 == u_slice.size()) {
        throw Error(ErrorKind::selection_at_boundary, "maximum at trait node " + std::to_string(k));
    }
    const double um = u_slice[k - 1];
    const double u0 = u_slice[k];
    const double up = u_slice[k + 1];
    const double curvature = um - 2.0 * u0 + up;
    if (!(curvature < 0.0)) throw Error(ErrorKind::selection_at_boundary, "no strict interior maximum");
    return grid_theta.node(k) + 0.5 * grid_theta.spacing() * (um - up) / curvature;
}

SelectedTraitField extract_selected_trait(double t, const Grid1D& grid_x, const Grid1D& grid_theta,
                                          const PhaseParams& params) {
    params.validate();
    SelectedTraitField out{grid_x, std::vector<double>(grid_x.size()), t};
    parallel_for(grid_x.size(), [&](std::size_t i) {
        std::vector<double> slice(grid_theta.size());
        for (std::size_t j = 0; j < slice.size(); ++j) {
            slice[j] = phase_free(t, grid_x.node(i), grid_theta.node(j), params);
        }
        out.theta_bar[i] = selected_trait(slice, grid_theta);
    });
    return out;
}

BurgersResult burgers_solve(const SelectedTraitField& init, const PhaseOracle& oracle, double t_end, double dt,
                            const BurgersOptions& options) {
    const std::size_t n = init.grid_x.size();
    if (init.theta_bar.size() != n) throw Error(ErrorKind::invalid_argument, "theta_bar size does not match the grid");
    if (!(dt > 0.0) || !(t_end >= init.time)) throw Error(ErrorKind::invalid_argument, "need dt > 0 and t_end >= t0");
    const double dx = init.grid_x.spacing();
    // flat data use the field scale over the domain as reference gradient
    double scale = 0.0;
    for (double v : init.theta_bar) scale = std::max(scale, std::abs(v));
    const double length = init.grid_x.hi() - init.grid_x.lo();
    const double reference = std::max({max_abs_gradient(init.theta_bar, dx), scale / length, 1e-8});
    const double limit = options.blow_up_factor * reference;
    const double left_initial = init.theta_bar.front();

    BurgersResult result{init, 0, 0.0, max_abs_gradient(init.theta_bar, dx)};
    std::vector<double>& theta = result.field.theta_bar;
    std::vector<double> next(n), speed(n), source(n);
    bool first = true;
    const auto steps = static_cast<std::size_t>(std::llround((t_end - init.time) / dt));
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = init.time + static_cast<double>(s) * dt;
        parallel_for(n, [&](std::size_t i) {
            const PhaseDerivatives d = checked(oracle, t, init.grid_x.node(i), theta[i]);
            speed[i] = -2.0 * theta[i] * d.du_dx;
            source[i] = d.du_dx * d.du_dx / -d.d2u_dthetatheta;
        });
        double a_max = 0.0;
        double a_min = speed[0];
        for (double a : speed) {
            a_max = std::max(a_max, std::abs(a));
            a_min = std::min(a_min, a);
        }
        if (dt * a_max > options.cfl * dx) {
            throw Error(ErrorKind::cfl_violation, "dt*max|a|/dx = " + std::to_string(dt * a_max / dx));
        }
        result.min_transport_speed = first ? a_min : std::min(result.min_transport_speed, a_min);
        first = false;

        parallel_for(n, [&](std::size_t i) {
            // upwind difference; missing neighbours copy the node (outflow extrapolation)
            const double back = i > 0 ? theta[i] - theta[i - 1] : 0.0;
            const double fwd = i + 1 < n ? theta[i + 1] - theta[i] : 0.0;
            const double diff = speed[i] >= 0.0 ? back : fwd;
            next[i] = theta[i] - dt * speed[i] * diff / dx + dt * source[i];
        });
        const double t_next = init.time + static_cast<double>(s + 1) * dt;
        if (speed[0] >= 0.0) next[0] = options.inflow ? options.inflow(t_next) : left_initial;
        theta.swap(next);

        const double grad = max_abs_gradient(theta, dx);
        result.max_gradient = std::max(result.max_gradient, grad);
        if (grad > limit) {
            throw Error(ErrorKind::gradient_blow_up, "|theta_x| = " + std::to_string(grad) + " at t=" +
                                                         std::to_string(t_next));
        }
        ++result.steps;
    }
    result.field.time = init.time + static_cast<double>(steps) * dt;
    return result;
}

CanonicalResidual canonical_residual(const SelectedTraitField& earlier, const SelectedTraitField& later,
                                     const PhaseOracle& oracle) {
    const std::size_t n = earlier.grid_x.size();
    if (later.grid_x.size() != n || earlier.theta_bar.size() != n || later.theta_bar.size() != n) {
        throw Error(ErrorKind::invalid_argument, "time levels must share one grid");
    }
    if (n < 3) throw Error(ErrorKind::invalid_argument, "residual needs at least 3 nodes");
    const double dt = later.time - earlier.time;
    if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "later level must follow the earlier one");
    const double dx = earlier.grid_x.spacing();
    CanonicalResidual out;
    out.values.resize(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double th = earlier.theta_bar[i];
        const PhaseDerivatives d = checked(oracle, earlier.time, earlier.grid_x.node(i), th);
        const double theta_t = (later.theta_bar[i] - th) / dt;
        const double theta_x = (earlier.theta_bar[i + 1] - earlier.theta_bar[i - 1]) / (2.0 * dx);
        const double value =
            theta_t - 2.0 * th * d.du_dx * theta_x - d.du_dx * d.du_dx / -d.d2u_dthetatheta;
        out.values[i - 1] = value;
        out.max_abs = std::max(out.max_abs, std::abs(value));
    }
    return out;
}

}  // namespace sortwave
