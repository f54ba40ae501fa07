#pragma once

#include "sortwave/core.hpp"
#include "sortwave/dispersion.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sortwave {

/// Density n(x, theta) on a rectangle. Storage is theta-major: the x-row of
/// trait node j starts at j * nx.
struct TraitField {
    Grid1D grid_x;
    Grid1D grid_theta;
    std::vector<double> n;
    double time = 0.0;

    TraitField(Grid1D gx, Grid1D gtheta);

    std::size_t nx() const noexcept { return grid_x.size(); }
    std::size_t ntheta() const noexcept { return grid_theta.size(); }
    double& at(std::size_t ix, std::size_t jt) { return n[jt * nx() + ix]; }
    double at(std::size_t ix, std::size_t jt) const { return n[jt * nx() + ix]; }

    /// rho(x) = trapezoid over theta.
    std::vector<double> marginal() const;
    /// Trapezoid integral over the whole rectangle.
    double total_mass() const;
};

/// n(0, x, theta) = profile(theta) * (1 + tanh(-x/width)) / 2.
TraitField smoothed_step_field(const Grid1D& grid_x, const Grid1D& grid_theta,
                               const std::function<double(double)>& profile, double width);

enum class XBoundary { neumann, dirichlet };

struct StepConfig {
    XBoundary right = XBoundary::dirichlet;  // the left end is always reflecting
};

/// Lie-split step: implicit x-diffusion per trait row, implicit trait
/// diffusion per x column, then explicit logistic growth with rho from the
/// diffused field. Holds the factorizations for a fixed (grids, params, dt).
class FrontStepper {
public:
    FrontStepper(const Grid1D& grid_x, const Grid1D& grid_theta, const ModelParams& params, double dt,
                 StepConfig config = {});

    /// Advances `field` by dt in place. Throws Error(positivity_violated) if a
    /// negative entry below -1e-12 appears; smaller negatives are clamped.
    void advance(TraitField& field);

    /// Marginal computed during the last advance (pre-reaction density).
    std::span<const double> last_marginal() const noexcept { return rho_; }

    double dt() const noexcept { return dt_; }

private:
    void diffuse_x(TraitField& field);
    void diffuse_theta(TraitField& field);
    void react(TraitField& field);

    ModelParams params_;
    double dt_;
    StepConfig config_;
    std::size_t nx_;
    std::size_t ntheta_;
    double hx_;
    double htheta_;
    // x-solves: one factorization per trait row
    std::vector<double> x_pivot_;
    std::vector<double> x_ratio_;
    std::vector<double> x_lower_;
    // trait solve shared by every column
    std::vector<double> t_pivot_;
    std::vector<double> t_ratio_;
    std::vector<double> t_lower_;
    std::vector<double> rho_;
};

/// One split step of `field` (convenience wrapper over FrontStepper).
TraitField step(const TraitField& field, const ModelParams& params, double dt, StepConfig config = {});

struct FrontTrack {
    std::vector<double> times;
    std::vector<double> positions;
    double threshold = 0.5;
};

struct TrackConfig {
    double threshold = 0.5;
    double output_interval = 0.5;
    bool moving_window = false;
    double window_trigger = 0.8;  // fraction of the window the front may reach
    double window_shift = 0.25;   // fraction of the width shifted per move
    std::size_t edge_margin_cells = 10;
    StepConfig step = {};
};

struct SimulationResult {
    TraitField field;
    FrontTrack track;
    std::size_t window_shifts = 0;
    double min_density = 0.0;
};

/// Integrates to t_end with a fixed dt, recording the front every
/// output_interval. Without the moving window the run stops with
/// Error(domain_exhausted) once the front is within edge_margin_cells of the
/// right boundary.
SimulationResult simulate(const ModelParams& params, TraitField init, double t_end, double dt,
                          const TrackConfig& tracking = {});

/// Rightmost down-crossing of rho = threshold, linearly interpolated.
double front_position(std::span<const double> rho, const Grid1D& grid_x, double threshold);
double front_position(const TraitField& field, double threshold);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    std::size_t first = 0;  // window [first, last)
    std::size_t last = 0;
};

/// Least squares of log x against log t on the samples [first, last).
PowerLawFit fit_power_law(const FrontTrack& track, std::size_t first, std::size_t last);
/// Same, over all samples with t_lo <= t <= t_hi.
PowerLawFit fit_power_law(const FrontTrack& track, double t_lo, double t_hi);

/// Least-squares slope of x against t over samples with t >= t_from.
double fit_front_speed(const FrontTrack& track, double t_from);

struct DelayedSpeedFit {
    double speed = 0.0;
    double log_coefficient = 0.0;
    double offset = 0.0;
    std::size_t samples = 0;
};

/// Least squares of x = speed*t + log_coefficient*log(t) + offset over
/// samples with t >= t_from > 0. The log term absorbs the logarithmic delay
/// of pulled fronts, so `speed` estimates the asymptotic speed.
DelayedSpeedFit fit_delayed_front_speed(const FrontTrack& track, double t_from);

}  // namespace sortwave
