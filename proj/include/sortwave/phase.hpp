#pragma once

#include "sortwave/core.hpp"
#include "sortwave/dispersion.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace sortwave {

/// Growth rate and mutation diffusivity of the unbounded-trait problem.
struct PhaseParams {
    double r = 1.0;
    double alpha = 1.0;

    void validate() const;
};

/// Unconstrained phase r t - (theta + alpha Z^2/4)^2 / (4 alpha t), with Z
/// the real root of Z^3 + (12 theta/alpha) Z + 24 x/alpha = 0. This is the
/// Hopf-Lax value of a population started at (x, theta) = (0, 0).
double phase_free(double t, double x, double theta, const PhaseParams& params);

/// Exact first and second derivatives of phase_free, by implicit
/// differentiation of the cubic.
struct PhaseGradient {
    double u = 0.0;
    double du_dt = 0.0;
    double du_dx = 0.0;
    double du_dtheta = 0.0;
    double d2u_dthetatheta = 0.0;
};
PhaseGradient phase_gradient(double t, double x, double theta, const PhaseParams& params);

struct PhaseSample {
    double t = 0.0;
    double x = 0.0;
    double theta = 0.0;
    double z = 0.0;
    double u0_free = 0.0;
    double u0 = 0.0;  // min(u0_free, 0)
    // centered differences, step 1e-5 * (1 + |coordinate|)
    double du_dt = 0.0;
    double du_dx = 0.0;
    double du_dtheta = 0.0;
    double d2u_dthetatheta = 0.0;
};

/// Requires t > 0 and theta >= 0.
PhaseSample phase_value(double t, double x, double theta, const PhaseParams& params);

/// Nonnegative x on the nullset at trait theta. Throws
/// Error(outside_support) unless 0 <= theta <= 2 sqrt(r alpha) t.
double nullset_x(double t, double theta, const PhaseParams& params);

struct EdgeLocation {
    double x_edge = 0.0;      // (4/3) alpha^{1/4} r^{3/4} t^{3/2}
    double theta_edge = 0.0;  // sqrt(r alpha) t
    // brute-force scan of nullset_x over the support
    double scan_theta = 0.0;
    double scan_x = 0.0;
};
EdgeLocation edge_location(double t, const PhaseParams& params, std::size_t scan_points = 20001);

struct CharacteristicState {
    double x = 0.0;
    double theta = 0.0;
    double p_x = 0.0;
    double p_theta = 0.0;
    double phase = 0.0;  // accrued r t - int (theta p_x^2 + alpha p_theta^2) dt
};

struct CharacteristicTrajectory {
    std::vector<double> times;
    std::vector<CharacteristicState> states;

    const CharacteristicState& end() const { return states.back(); }
};

/// RK4 integration of x' = 2 theta p_x, theta' = 2 alpha p_theta,
/// p_x' = 0, p_theta' = -p_x^2 from (0, 0). Throws Error(left_domain) if theta
/// turns negative. `store_every` thins the stored trajectory (the endpoint is
/// always kept).
CharacteristicTrajectory integrate_characteristics(double p_x0, double p_theta0, double t_end,
                                                   const PhaseParams& params, double dt,
                                                   std::size_t store_every = 1);

/// Sampled dispersion relation c(lambda), lambda < 0, interpolated by a
/// monotone (Fritsch-Carlson) cubic. Outside the sampled range it falls back
/// to the Rayleigh envelope (theta_max lambda^2 + r)/|lambda|.
class SpeedTable {
public:
    SpeedTable(std::vector<double> lambdas, std::vector<double> speeds, double envelope_r, double envelope_theta_max);

    /// Samples c on `lambdas` with the dispersion solver.
    static SpeedTable from_dispersion(const ModelParams& params, std::span<const double> lambdas,
                                      std::size_t theta_nodes = default_theta_nodes);
    /// Geometric lambda grid between lambda_lo < lambda_hi < 0.
    static std::vector<double> lambda_grid(double lambda_lo, double lambda_hi, std::size_t count);

    double speed(double lambda) const;
    /// Effective Hamiltonian H(p) = -|p| c(-|p|), i.e. minus the principal eigenvalue.
    double hamiltonian(double p) const;
    bool in_range(double lambda) const noexcept;
    /// Smallest tabulated speed and its decay rate.
    std::pair<double, double> minimum() const;

    const std::vector<double>& lambdas() const noexcept { return lambdas_; }
    const std::vector<double>& speeds() const noexcept { return speeds_; }

private:
    std::vector<double> lambdas_;
    std::vector<double> speeds_;
    std::vector<double> slopes_;
    double envelope_r_;
    double envelope_theta_max_;
};

struct EikonalResult {
    std::vector<double> u;
    double time = 0.0;
    std::vector<double> times;
    std::vector<double> fronts;      // rightmost point of {u = 0}
    std::vector<std::vector<double>> snapshots;  // u at every recorded time, if requested
    double max_hamiltonian_slope = 0.0;
    bool used_envelope = false;      // slopes steeper than the table reach
};

struct EikonalOptions {
    double output_interval = 0.5;
    bool keep_snapshots = false;
    double cfl = 0.9;
};

/// Lax-Friedrichs update of u_t + H(u_x) = 0 followed by the obstacle clamp
/// u <= 0. Throws Error(cfl_violation) before stepping when
/// dt * max|H'| > cfl * dx.
EikonalResult eikonal_propagate(const SpeedTable& table, const Grid1D& grid_x, std::vector<double> u_init,
                                double t_end, double dt, const EikonalOptions& options = {});

/// Rightmost zero of u (sub-cell, extrapolated from the first negative nodes).
double obstacle_front(std::span<const double> u, const Grid1D& grid_x);

/// u_t - theta u_x^2 - alpha u_theta^2 - r with centered differences of step h.
double hj_residual_at(double t, double x, double theta, const PhaseParams& params, double h);

struct HjResidualReport {
    double max_residual = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;  // too close to the nullset or to theta = 0
};

/// Residual over a cloud of (t, x, theta) points. Points with
/// u0_free >= -delta or theta <= delta are skipped and counted.
HjResidualReport hj_residual(const PhaseParams& params, std::span<const std::array<double, 3>> samples, double h,
                             double delta = 1e-3);

}  // namespace sortwave
