#include "sortwave/phase.hpp"

#include "sortwave/error.hpp"
#include "sortwave/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sortwave {

void PhaseParams::validate() const {
    if (!std::isfinite(r) || !(r > 0.0) || !std::isfinite(alpha) || !(alpha > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "r and alpha must be finite and positive");
    }
}

namespace {

double cubic_root_for(double x, double theta, const PhaseParams& params) {
    return depressed_cubic_root(12.0 * theta / params.alpha, 24.0 * x / params.alpha);
}

void check_point(double t, double theta) {
    if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "phase needs t > 0");
    if (!(theta >= 0.0)) throw Error(ErrorKind::invalid_argument, "phase needs theta >= 0");
}

}  // namespace

double phase_free(double t, double x, double theta, const PhaseParams& params) {
    const double z = cubic_root_for(x, theta, params);
    const double g = theta + 0.25 * params.alpha * z * z;
    return params.r * t - g * g / (4.0 * params.alpha * t);
}

PhaseGradient phase_gradient(double t, double x, double theta, const PhaseParams& params) {
    check_point(t, theta);
    const double a = params.alpha;
    const double z = cubic_root_for(x, theta, params);
    const double fz = 3.0 * z * z + 12.0 * theta / a;  // dF/dZ of F = Z^3 + pZ + q
    PhaseGradient out;
    const double g = theta + 0.25 * a * z * z;
    out.u = params.r * t - g * g / (4.0 * a * t);
    out.du_dt = params.r + g * g / (4.0 * a * t * t);
    if (fz == 0.0) {
        // origin: Z = 0, g = theta = 0, all spatial derivatives of g^2 vanish
        out.du_dtheta = -g / (2.0 * a * t);
        out.d2u_dthetatheta = -1.0 / (2.0 * a * t);
        return out;
    }
    const double z_x = -(24.0 / a) / fz;
    const double z_th = -(12.0 * z / a) / fz;
    const double z_thth = -(2.0 * (12.0 / a) * z_th + 6.0 * z * z_th * z_th) / fz;
    const double g_x = 0.5 * a * z * z_x;
    const double g_th = 1.0 + 0.5 * a * z * z_th;
    const double g_thth = 0.5 * a * (z_th * z_th + z * z_thth);
    out.du_dx = -g * g_x / (2.0 * a * t);
    out.du_dtheta = -g * g_th / (2.0 * a * t);
    out.d2u_dthetatheta = -(g_th * g_th + g * g_thth) / (2.0 * a * t);
    return out;
}

PhaseSample phase_value(double t, double x, double theta, const PhaseParams& params) {
    params.validate();
    check_point(t, theta);
    PhaseSample s;
    s.t = t;
    s.x = x;
    s.theta = theta;
    s.z = cubic_root_for(x, theta, params);
    s.u0_free = phase_free(t, x, theta, params);
    s.u0 = std::min(s.u0_free, 0.0);

    auto u = [&](double tt, double xx, double th) { return phase_free(tt, xx, th, params); };
    const double ht = 1e-5 * (1.0 + std::abs(t));
    const double hx = 1e-5 * (1.0 + std::abs(x));
    const double hth = 1e-5 * (1.0 + std::abs(theta));
    const double tt = std::max(t, 1.5 * ht);  // keep t - ht > 0
    s.du_dt = (u(tt + ht, x, theta) - u(tt - ht, x, theta)) / (2.0 * ht);
    s.du_dx = (u(t, x + hx, theta) - u(t, x - hx, theta)) / (2.0 * hx);
    if (theta >= hth) {
        const double up = u(t, x, theta + hth);
        const double mid = s.u0_free;
        const double dn = u(t, x, theta - hth);
        s.du_dtheta = (up - dn) / (2.0 * hth);
        s.d2u_dthetatheta = (up - 2.0 * mid + dn) / (hth * hth);
    } else {
        // one-sided second-order stencils at the trait boundary
        const double f0 = s.u0_free;
        const double f1 = u(t, x, theta + hth);
        const double f2 = u(t, x, theta + 2.0 * hth);
        const double f3 = u(t, x, theta + 3.0 * hth);
        s.du_dtheta = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * hth);
        s.d2u_dthetatheta = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (hth * hth);
    }
    return s;
}

double nullset_x(double t, double theta, const PhaseParams& params) {
    params.validate();
    if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "nullset needs t > 0");
    const double spread = 2.0 * std::sqrt(params.r * params.alpha) * t;
    if (!(theta >= 0.0) || theta > spread) {
        throw Error(ErrorKind::outside_support, "theta must lie in [0, 2 sqrt(r alpha) t]");
    }
    const double sum = 2.0 * theta + spread;
    return std::sqrt((spread - theta) * sum * sum / (9.0 * params.alpha));
}

EdgeLocation edge_location(double t, const PhaseParams& params, std::size_t scan_points) {
    params.validate();
    if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "edge location needs t > 0");
    EdgeLocation e;
    e.x_edge = 4.0 / 3.0 * std::pow(params.alpha, 0.25) * std::pow(params.r, 0.75) * std::pow(t, 1.5);
    e.theta_edge = std::sqrt(params.r * params.alpha) * t;

    const double spread = 2.0 * std::sqrt(params.r * params.alpha) * t;
    const Grid1D scan(0.0, spread, std::max<std::size_t>(scan_points, 3));
    for (std::size_t k = 0; k < scan.size(); ++k) {
        const double th = std::min(scan.node(k), spread);
        const double x = nullset_x(t, th, params);
        if (x > e.scan_x) {
            e.scan_x = x;
            e.scan_theta = th;
        }
    }
    return e;
}

CharacteristicTrajectory integrate_characteristics(double p_x0, double p_theta0, double t_end,
                                                   const PhaseParams& params, double dt,
                                                   std::size_t store_every) {
    params.validate();
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error(ErrorKind::invalid_argument, "need dt > 0 and t_end >= 0");
    store_every = std::max<std::size_t>(store_every, 1);

    using State = std::array<double, 5>;  // x, theta, p_x, p_theta, phase
    const double a = params.alpha;
    const double r = params.r;
    auto rhs = [&](const State& s) -> State {
        const double px = s[2];
        const double pth = s[3];
        return {2.0 * s[1] * px, 2.0 * a * pth, 0.0, -px * px, r - s[1] * px * px - a * pth * pth};
    };

    CharacteristicTrajectory traj;
    State s{0.0, 0.0, p_x0, p_theta0, 0.0};
    auto push = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back({s[0], s[1], s[2], s[3], s[4]});
    };
    push(0.0);
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    double t = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double h = std::min(dt, t_end - t);
        const State k1 = rhs(s);
        State tmp;
        for (int i = 0; i < 5; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
        const State k2 = rhs(tmp);
        for (int i = 0; i < 5; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
        const State k3 = rhs(tmp);
        for (int i = 0; i < 5; ++i) tmp[i] = s[i] + h * k3[i];
        const State k4 = rhs(tmp);
        for (int i = 0; i < 5; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t = (k + 1 == steps) ? t_end : t + h;
        if (s[1] < 0.0) {
            throw Error(ErrorKind::left_domain, "trait coordinate became negative at t=" + std::to_string(t));
        }
        if ((k + 1) % store_every == 0 || k + 1 == steps) push(t);
    }
    return traj;
}

SpeedTable::SpeedTable(std::vector<double> lambdas, std::vector<double> speeds, double envelope_r,
                       double envelope_theta_max)
    : lambdas_(std::move(lambdas))
    , speeds_(std::move(speeds))
    , envelope_r_(envelope_r)
    , envelope_theta_max_(envelope_theta_max) {
    const std::size_t n = lambdas_.size();
    if (n < 2 || speeds_.size() != n) throw Error(ErrorKind::invalid_argument, "speed table needs >= 2 samples");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(lambdas_[k] < 0.0) || !(speeds_[k] > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "speed table needs lambda < 0 and c > 0");
        }
        if (k > 0 && !(lambdas_[k] > lambdas_[k - 1])) {
            throw Error(ErrorKind::invalid_argument, "speed table lambdas must be strictly increasing");
        }
    }
    // Fritsch-Carlson slopes
    std::vector<double> secant(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        secant[k] = (speeds_[k + 1] - speeds_[k]) / (lambdas_[k + 1] - lambdas_[k]);
    }
    slopes_.assign(n, 0.0);
    slopes_.front() = secant.front();
    slopes_.back() = secant.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (secant[k - 1] * secant[k] <= 0.0) {
            slopes_[k] = 0.0;
        } else {
            const double h0 = lambdas_[k] - lambdas_[k - 1];
            const double h1 = lambdas_[k + 1] - lambdas_[k];
            const double w0 = 2.0 * h1 + h0;
            const double w1 = h1 + 2.0 * h0;
            slopes_[k] = (w0 + w1) / (w0 / secant[k - 1] + w1 / secant[k]);
        }
    }
}

SpeedTable SpeedTable::from_dispersion(const ModelParams& params, std::span<const double> lambdas,
                                       std::size_t theta_nodes) {
    std::vector<double> ls(lambdas.begin(), lambdas.end());
    std::sort(ls.begin(), ls.end());
    std::vector<double> cs = speed_scan(params, ls, theta_nodes);
    return SpeedTable(std::move(ls), std::move(cs), params.r, params.theta_max);
}

std::vector<double> SpeedTable::lambda_grid(double lambda_lo, double lambda_hi, std::size_t count) {
    if (!(lambda_lo < lambda_hi) || !(lambda_hi < 0.0) || count < 2) {
        throw Error(ErrorKind::invalid_argument, "lambda grid needs lambda_lo < lambda_hi < 0 and count >= 2");
    }
    std::vector<double> out(count);
    const double log_lo = std::log(-lambda_hi);
    const double log_hi = std::log(-lambda_lo);
    for (std::size_t k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(count - 1);
        out[count - 1 - k] = -std::exp(log_lo + f * (log_hi - log_lo));
    }
    out.front() = lambda_lo;
    out.back() = lambda_hi;
    return out;
}

bool SpeedTable::in_range(double lambda) const noexcept {
    return lambda >= lambdas_.front() && lambda <= lambdas_.back();
}

double SpeedTable::speed(double lambda) const {
    if (!in_range(lambda)) {
        return (envelope_theta_max_ * lambda * lambda + envelope_r_) / std::abs(lambda);
    }
    const auto it = std::upper_bound(lambdas_.begin(), lambdas_.end(), lambda);
    std::size_t k = static_cast<std::size_t>(std::distance(lambdas_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, lambdas_.size() - 1) - 1;
    const double h = lambdas_[k + 1] - lambdas_[k];
    const double s = (lambda - lambdas_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * speeds_[k] + (s3 - 2.0 * s2 + s) * h * slopes_[k] +
           (-2.0 * s3 + 3.0 * s2) * speeds_[k + 1] + (s3 - s2) * h * slopes_[k + 1];
}

double SpeedTable::hamiltonian(double p) const {
    const double q = std::abs(p);
    if (q == 0.0) return -envelope_r_;
    return -q * speed(-q);
}

std::pair<double, double> SpeedTable::minimum() const {
    const auto it = std::min_element(speeds_.begin(), speeds_.end());
    const auto k = static_cast<std::size_t>(std::distance(speeds_.begin(), it));
    return {speeds_[k], lambdas_[k]};
}

double obstacle_front(std::span<const double> u, const Grid1D& grid_x) {
    std::size_t last = u.size();
    for (std::size_t i = u.size(); i-- > 0;) {
        if (u[i] >= 0.0) {
            last = i;
            break;
        }
    }
    if (last == u.size()) throw Error(ErrorKind::front_not_in_domain, "u has no zero on the grid");
    if (last + 2 >= u.size()) return grid_x.node(last);
    // zero of the line through the first two negative nodes, kept in its cell
    const double u1 = u[last + 1];
    const double u2 = u[last + 2];
    const double slope = (u2 - u1) / grid_x.spacing();
    double offset = slope < 0.0 ? 1.0 - u1 / slope : 0.0;
    offset = std::clamp(offset, 0.0, 1.0);
    return grid_x.node(last) + offset * grid_x.spacing();
}

EikonalResult eikonal_propagate(const SpeedTable& table, const Grid1D& grid_x, std::vector<double> u_init,
                                double t_end, double dt, const EikonalOptions& options) {
    const std::size_t n = grid_x.size();
    if (u_init.size() != n) throw Error(ErrorKind::invalid_argument, "initial data size does not match the grid");
    if (std::any_of(u_init.begin(), u_init.end(), [](double v) { return !(v <= 0.0); })) {
        throw Error(ErrorKind::invalid_argument, "initial phase must be <= 0");
    }
    const double dx = grid_x.spacing();

    // largest slope present initially bounds the slopes seen later
    double p_max = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) p_max = std::max(p_max, std::abs(u_init[i + 1] - u_init[i]) / dx);
    p_max = std::max(p_max, 1e-3);
    const std::size_t probes = 4001;
    // p = 0 is skipped: H(0) is the envelope limit, not the table
    const double probe_step = p_max / static_cast<double>(probes - 1);
    double h_slope = 0.0;
    double prev = table.hamiltonian(probe_step);
    bool envelope = -probe_step < table.lambdas().front();
    for (std::size_t k = 2; k < probes; ++k) {
        const double p = p_max * static_cast<double>(k) / static_cast<double>(probes - 1);
        const double h = table.hamiltonian(p);
        h_slope = std::max(h_slope, std::abs(h - prev) / probe_step);
        envelope = envelope || -p < table.lambdas().front();
        prev = h;
    }
    if (dt * h_slope > options.cfl * dx) {
        throw Error(ErrorKind::cfl_violation, "dt*max|H'| = " + std::to_string(dt * h_slope) + " exceeds " +
                                                  std::to_string(options.cfl) + "*dx");
    }

    EikonalResult result;
    result.max_hamiltonian_slope = h_slope;
    result.used_envelope = envelope;
    std::vector<double> u = std::move(u_init);
    std::vector<double> next(n);
    const double viscosity = 0.5 * h_slope;

    auto record = [&](double t) {
        result.times.push_back(t);
        result.fronts.push_back(obstacle_front(u, grid_x));
        if (options.keep_snapshots) result.snapshots.push_back(u);
    };
    record(0.0);
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const auto per_output = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.output_interval / dt)));
    for (std::size_t s = 1; s <= steps; ++s) {
        parallel_for(n, [&](std::size_t i) {
            // one-sided differences; the ends copy their neighbour slope
            const double left = i > 0 ? (u[i] - u[i - 1]) / dx : (n > 1 ? (u[1] - u[0]) / dx : 0.0);
            const double right = i + 1 < n ? (u[i + 1] - u[i]) / dx : (u[i] - u[i - 1]) / dx;
            const double flux = table.hamiltonian(0.5 * (left + right));
            const double value = u[i] - dt * flux + dt * viscosity * (right - left);
            next[i] = std::min(value, 0.0);
        });
        u.swap(next);
        if (s % per_output == 0 || s == steps) record(static_cast<double>(s) * dt);
    }
    result.u = std::move(u);
    result.time = static_cast<double>(steps) * dt;
    return result;
}

double hj_residual_at(double t, double x, double theta, const PhaseParams& params, double h) {
    auto u = [&](double tt, double xx, double th) { return phase_free(tt, xx, th, params); };
    const double ut = (u(t + h, x, theta) - u(t - h, x, theta)) / (2.0 * h);
    const double ux = (u(t, x + h, theta) - u(t, x - h, theta)) / (2.0 * h);
    const double uth = (u(t, x, theta + h) - u(t, x, theta - h)) / (2.0 * h);
    return ut - theta * ux * ux - params.alpha * uth * uth - params.r;
}

HjResidualReport hj_residual(const PhaseParams& params, std::span<const std::array<double, 3>> samples, double h,
                             double delta) {
    params.validate();
    HjResidualReport report;
    for (const auto& pt : samples) {
        const double t = pt[0];
        const double x = pt[1];
        const double th = pt[2];
        if (!(t > h) || th <= std::max(delta, h) || phase_free(t, x, th, params) >= -delta) {
            ++report.excluded;
            continue;
        }
        report.max_residual = std::max(report.max_residual, std::abs(hj_residual_at(t, x, th, params, h)));
        ++report.used;
    }
    return report;
}

}  // namespace sortwave
