#pragma once

#include "sortwave/core.hpp"
#include "sortwave/phase.hpp"

#include <functional>
#include <span>
#include <vector>

namespace sortwave {

/// Phase data needed by the canonical equation at one (t, x, theta).
struct PhaseDerivatives {
    double u = 0.0;
    double du_dx = 0.0;
    double d2u_dthetatheta = 0.0;  // must be < 0 where queried
};

using PhaseOracle = std::function<PhaseDerivatives(double t, double x, double theta)>;

/// Exact derivatives of the explicit phase.
PhaseOracle explicit_phase_oracle(const PhaseParams& params);

/// du_dx = -g and d2u_dthetatheta = -m everywhere.
PhaseOracle uniform_phase_oracle(double g, double m);

/// Locally selected trait theta_bar(x) at one time.
struct SelectedTraitField {
    Grid1D grid_x;
    std::vector<double> theta_bar;
    double time = 0.0;
};

/// Vertex of the parabola through the discrete argmax and its two
/// neighbours. Throws Error(selection_at_boundary) if the maximum sits on an
/// end node or the slice has no strict interior maximum.
double selected_trait(std::span<const double> u_slice, const Grid1D& grid_theta);

/// theta_bar of the explicit phase at time t, maximizing over `grid_theta`.
SelectedTraitField extract_selected_trait(double t, const Grid1D& grid_x, const Grid1D& grid_theta,
                                          const PhaseParams& params);

struct BurgersOptions {
    double cfl = 0.9;
    double blow_up_factor = 1e3;
    /// Left inflow value at time t; empty holds the initial left value.
    std::function<double(double)> inflow = {};
};

struct BurgersResult {
    SelectedTraitField field;
    std::size_t steps = 0;
    double min_transport_speed = 0.0;  // min of a = -2 theta_bar du_dx over all steps
    double max_gradient = 0.0;         // max |d theta_bar / dx| over all steps
};

/// First-order upwind integration of
///   theta_t - 2 theta u_x theta_x = u_x^2 / (-u_thetatheta)
/// with coefficients taken at the current theta_bar. Throws
/// Error(cfl_violation), Error(oracle_degenerate) if u_thetatheta >= -1e-12,
/// or Error(gradient_blow_up) once |theta_x| exceeds blow_up_factor times
/// the initial maximum (at least max|theta_bar| / domain length).
BurgersResult burgers_solve(const SelectedTraitField& init, const PhaseOracle& oracle, double t_end, double dt,
                            const BurgersOptions& options = {});

struct CanonicalResidual {
    std::vector<double> values;  // interior nodes 1 .. n-2
    double max_abs = 0.0;
};

/// Forward-time, centred-space residual of the canonical equation between two
/// time levels on the same grid; coefficients at (earlier.time, x, earlier theta).
CanonicalResidual canonical_residual(const SelectedTraitField& earlier, const SelectedTraitField& later,
                                     const PhaseOracle& oracle);

/// Closed form of theta_bar for the explicit phase: (alpha/4)(6|x|/alpha)^{2/3}.
double explicit_selected_trait(double x, const PhaseParams& params);

}  // namespace sortwave
