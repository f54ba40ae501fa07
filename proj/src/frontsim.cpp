#include "sortwave/frontsim.hpp"

#include "sortwave/error.hpp"
#include "sortwave/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace sortwave {

namespace {

constexpr double positivity_floor = -1e-12;
constexpr std::size_t column_block = 256;

// Thomas factorization of I - coeff*D2 (ghost-reflected left end; right end
// reflecting or pinned to zero). Writes pivots, sup/pivot ratios and the
// sub-diagonal into the three output slices.
void factor_implicit_diffusion(double coeff, std::size_t n, bool pinned_right, std::span<double> pivot,
                               std::span<double> ratio, std::span<double> lower) {
    std::vector<double> sub(n, 0.0), diag(n, 1.0 + 2.0 * coeff), sup(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) sub[i] = -coeff;
    for (std::size_t i = 0; i + 1 < n; ++i) sup[i] = -coeff;
    sup[0] = -2.0 * coeff;
    if (pinned_right) {
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
    } else {
        sub[n - 1] = -2.0 * coeff;
    }
    double prev_ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = diag[i] - (i > 0 ? sub[i] * prev_ratio : 0.0);
        if (p == 0.0) throw Error(ErrorKind::singular_system, "zero pivot in implicit diffusion");
        pivot[i] = p;
        ratio[i] = sup[i] / p;
        lower[i] = sub[i];
        prev_ratio = ratio[i];
    }
}

template <typename Fn>
void for_each_block(std::size_t count, Fn&& fn) {
    const std::size_t blocks = (count + column_block - 1) / column_block;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * column_block;
        fn(lo, std::min(count, lo + column_block));
    });
}

}  // namespace

TraitField::TraitField(Grid1D gx, Grid1D gtheta)
    : grid_x(gx), grid_theta(gtheta), n(gx.size() * gtheta.size(), 0.0) {}

std::vector<double> TraitField::marginal() const {
    const std::size_t nx_ = nx();
    const std::size_t nt = ntheta();
    const double h = grid_theta.spacing();
    std::vector<double> rho(nx_, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
        const double w = (j == 0 || j + 1 == nt) ? 0.5 * h : h;
        const double* row = n.data() + j * nx_;
        for (std::size_t i = 0; i < nx_; ++i) rho[i] += w * row[i];
    }
    return rho;
}

double TraitField::total_mass() const { return trapezoid(marginal(), grid_x.spacing()); }

TraitField smoothed_step_field(const Grid1D& grid_x, const Grid1D& grid_theta,
                               const std::function<double(double)>& profile, double width) {
    TraitField field(grid_x, grid_theta);
    for (std::size_t j = 0; j < grid_theta.size(); ++j) {
        const double weight = profile(grid_theta.node(j));
        for (std::size_t i = 0; i < grid_x.size(); ++i) {
            field.at(i, j) = weight * 0.5 * (1.0 + std::tanh(-grid_x.node(i) / width));
        }
    }
    return field;
}

FrontStepper::FrontStepper(const Grid1D& grid_x, const Grid1D& grid_theta, const ModelParams& params, double dt,
                           StepConfig config)
    : params_(params)
    , dt_(dt)
    , config_(config)
    , nx_(grid_x.size())
    , ntheta_(grid_theta.size())
    , hx_(grid_x.spacing())
    , htheta_(grid_theta.spacing()) {
    if (!(dt > 0.0) || dt > 0.1 / params.r + 1e-15) {
        throw Error(ErrorKind::invalid_argument, "time step must satisfy 0 < dt <= 0.1/r");
    }
    const bool pinned = config_.right == XBoundary::dirichlet;
    x_pivot_.resize(nx_ * ntheta_);
    x_ratio_.resize(nx_ * ntheta_);
    x_lower_.resize(nx_ * ntheta_);
    for (std::size_t j = 0; j < ntheta_; ++j) {
        const double coeff = dt * grid_theta.node(j) / (hx_ * hx_);
        const std::size_t off = j * nx_;
        factor_implicit_diffusion(coeff, nx_, pinned, std::span(x_pivot_).subspan(off, nx_),
                                  std::span(x_ratio_).subspan(off, nx_), std::span(x_lower_).subspan(off, nx_));
    }
    t_pivot_.resize(ntheta_);
    t_ratio_.resize(ntheta_);
    t_lower_.resize(ntheta_);
    factor_implicit_diffusion(dt * params.alpha / (htheta_ * htheta_), ntheta_, false, t_pivot_, t_ratio_, t_lower_);
    rho_.assign(nx_, 0.0);
}

void FrontStepper::diffuse_x(TraitField& field) {
    const bool pinned = config_.right == XBoundary::dirichlet;
    parallel_for(ntheta_, [&](std::size_t j) {
        double* row = field.n.data() + j * nx_;
        const double* pivot = x_pivot_.data() + j * nx_;
        const double* ratio = x_ratio_.data() + j * nx_;
        const double* lower = x_lower_.data() + j * nx_;
        if (pinned) row[nx_ - 1] = 0.0;
        row[0] /= pivot[0];
        for (std::size_t i = 1; i < nx_; ++i) row[i] = (row[i] - lower[i] * row[i - 1]) / pivot[i];
        for (std::size_t i = nx_ - 1; i-- > 0;) row[i] -= ratio[i] * row[i + 1];
    });
}

void FrontStepper::diffuse_theta(TraitField& field) {
    double* data = field.n.data();
    for_each_block(nx_, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) data[i] /= t_pivot_[0];
        for (std::size_t j = 1; j < ntheta_; ++j) {
            double* row = data + j * nx_;
            const double* prev = row - nx_;
            for (std::size_t i = lo; i < hi; ++i) row[i] = (row[i] - t_lower_[j] * prev[i]) / t_pivot_[j];
        }
        for (std::size_t j = ntheta_ - 1; j-- > 0;) {
            double* row = data + j * nx_;
            const double* next = row + nx_;
            for (std::size_t i = lo; i < hi; ++i) row[i] -= t_ratio_[j] * next[i];
        }
    });
}

void FrontStepper::react(TraitField& field) {
    double* data = field.n.data();
    const double growth = dt_ * params_.r;
    std::atomic<bool> violated{false};
    for_each_block(nx_, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) rho_[i] = 0.0;
        for (std::size_t j = 0; j < ntheta_; ++j) {
            const double w = (j == 0 || j + 1 == ntheta_) ? 0.5 * htheta_ : htheta_;
            const double* row = data + j * nx_;
            for (std::size_t i = lo; i < hi; ++i) rho_[i] += w * row[i];
        }
        bool bad = false;
        for (std::size_t j = 0; j < ntheta_; ++j) {
            double* row = data + j * nx_;
            for (std::size_t i = lo; i < hi; ++i) {
                double v = row[i] + growth * row[i] * (1.0 - rho_[i]);
                if (v < 0.0) {
                    if (v < positivity_floor) bad = true;
                    v = 0.0;
                }
                row[i] = v;
            }
        }
        if (bad) violated.store(true, std::memory_order_relaxed);
    });
    if (violated) throw Error(ErrorKind::positivity_violated, "density below -1e-12 at t=" + std::to_string(field.time));
}

void FrontStepper::advance(TraitField& field) {
    if (field.nx() != nx_ || field.ntheta() != ntheta_) {
        throw Error(ErrorKind::invalid_argument, "field shape does not match the stepper grids");
    }
    diffuse_x(field);
    diffuse_theta(field);
    react(field);
    field.time += dt_;
}

TraitField step(const TraitField& field, const ModelParams& params, double dt, StepConfig config) {
    FrontStepper stepper(field.grid_x, field.grid_theta, params, dt, config);
    TraitField next = field;
    stepper.advance(next);
    return next;
}

double front_position(std::span<const double> rho, const Grid1D& grid_x, double threshold) {
    for (std::size_t i = rho.size() - 1; i > 0; --i) {
        const double left = rho[i - 1];
        const double right = rho[i];
        if (left >= threshold && right < threshold) {
            const double frac = (left - threshold) / (left - right);
            return grid_x.node(i - 1) + frac * grid_x.spacing();
        }
    }
    throw Error(ErrorKind::front_not_in_domain, "no down-crossing of rho = " + std::to_string(threshold));
}

double front_position(const TraitField& field, double threshold) {
    return front_position(field.marginal(), field.grid_x, threshold);
}

namespace {

void shift_window(TraitField& field, std::size_t cells) {
    const std::size_t nx = field.nx();
    for (std::size_t j = 0; j < field.ntheta(); ++j) {
        double* row = field.n.data() + j * nx;
        std::copy(row + cells, row + nx, row);
        std::fill(row + (nx - cells), row + nx, 0.0);
    }
}

}  // namespace

SimulationResult simulate(const ModelParams& params, TraitField init, double t_end, double dt,
                          const TrackConfig& tracking) {
    params.validate();
    if (!(t_end >= init.time)) throw Error(ErrorKind::invalid_argument, "t_end precedes the initial time");
    if (!(tracking.output_interval > 0.0)) throw Error(ErrorKind::invalid_argument, "output interval must be positive");
    if (std::any_of(init.n.begin(), init.n.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
        throw Error(ErrorKind::invalid_argument, "initial density must be finite and nonnegative");
    }

    SimulationResult result{std::move(init), {}, 0, 0.0};
    TraitField& field = result.field;
    FrontTrack& track = result.track;
    track.threshold = tracking.threshold;
    FrontStepper stepper(field.grid_x, field.grid_theta, params, dt, tracking.step);

    const double x_lo0 = field.grid_x.lo();
    const double x_hi0 = field.grid_x.hi();
    const double hx = field.grid_x.spacing();
    const std::size_t nx = field.nx();
    const auto shift_cells = static_cast<std::size_t>(std::floor(tracking.window_shift * static_cast<double>(nx)));
    std::size_t offset_cells = 0;

    const double t0 = field.time;
    const auto total_steps = static_cast<std::size_t>(std::llround((t_end - t0) / dt));
    const auto steps_per_output = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(tracking.output_interval / dt)));

    auto record = [&](std::span<const double> rho) {
        bool any = false;
        for (double v : rho) any = any || v >= tracking.threshold;
        if (!any) return;
        track.times.push_back(field.time);
        track.positions.push_back(front_position(rho, field.grid_x, tracking.threshold));
    };

    for (std::size_t s = 1; s <= total_steps; ++s) {
        stepper.advance(field);
        field.time = t0 + static_cast<double>(s) * dt;
        const std::span<const double> rho = stepper.last_marginal();

        // rightmost node still above the threshold
        std::size_t edge = 0;
        bool found = false;
        for (std::size_t i = nx; i-- > 0;) {
            if (rho[i] >= tracking.threshold) {
                edge = i;
                found = true;
                break;
            }
        }
        if (found) {
            if (tracking.moving_window) {
                if (static_cast<double>(edge) > tracking.window_trigger * static_cast<double>(nx - 1) && shift_cells > 0) {
                    shift_window(field, shift_cells);
                    offset_cells += shift_cells;
                    const double off = static_cast<double>(offset_cells) * hx;
                    field.grid_x = Grid1D(x_lo0 + off, x_hi0 + off, nx);
                    ++result.window_shifts;
                    if (s % steps_per_output == 0) record(field.marginal());
                    continue;
                }
            } else if (edge + tracking.edge_margin_cells >= nx - 1) {
                throw Error(ErrorKind::domain_exhausted,
                            "front reached the right boundary at t=" + std::to_string(field.time));
            }
        }
        if (s % steps_per_output == 0) record(rho);
    }
    result.min_density = *std::min_element(field.n.begin(), field.n.end());
    return result;
}

namespace {

struct LineFit {
    double slope;
    double intercept;
    double r_squared;
};

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
    const auto m = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return {slope, my - slope * mx, r2};
}

}  // namespace

PowerLawFit fit_power_law(const FrontTrack& track, std::size_t first, std::size_t last) {
    if (last > track.times.size() || first >= last || last - first < 10) {
        throw Error(ErrorKind::too_few_points, "power-law fit needs at least 10 samples");
    }
    std::vector<double> lt, lx;
    for (std::size_t k = first; k < last; ++k) {
        if (!(track.times[k] > 0.0) || !(track.positions[k] > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "power-law fit needs positive times and positions");
        }
        lt.push_back(std::log(track.times[k]));
        lx.push_back(std::log(track.positions[k]));
    }
    const LineFit fit = least_squares(lt, lx);
    return {fit.slope, std::exp(fit.intercept), fit.r_squared, first, last};
}

PowerLawFit fit_power_law(const FrontTrack& track, double t_lo, double t_hi) {
    std::size_t first = track.times.size();
    std::size_t last = 0;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        if (track.times[k] >= t_lo && track.times[k] <= t_hi) {
            first = std::min(first, k);
            last = k + 1;
        }
    }
    if (first >= last) throw Error(ErrorKind::too_few_points, "no samples in the fit window");
    return fit_power_law(track, first, last);
}

double fit_front_speed(const FrontTrack& track, double t_from) {
    std::vector<double> ts, xs;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        if (track.times[k] >= t_from) {
            ts.push_back(track.times[k]);
            xs.push_back(track.positions[k]);
        }
    }
    if (ts.size() < 2) throw Error(ErrorKind::too_few_points, "speed fit needs at least 2 samples");
    return least_squares(ts, xs).slope;
}

DelayedSpeedFit fit_delayed_front_speed(const FrontTrack& track, double t_from) {
    if (!(t_from > 0.0)) throw Error(ErrorKind::invalid_argument, "delayed speed fit needs t_from > 0");
    std::vector<double> ts, xs;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        if (track.times[k] >= t_from) {
            ts.push_back(track.times[k]);
            xs.push_back(track.positions[k]);
        }
    }
    if (ts.size() < 10) throw Error(ErrorKind::too_few_points, "delayed speed fit needs at least 10 samples");
    Eigen::MatrixXd design(ts.size(), 3);
    Eigen::VectorXd rhs(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        design(row, 0) = ts[k];
        design(row, 1) = std::log(ts[k]);
        design(row, 2) = 1.0;
        rhs(row) = xs[k];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    return {coef(0), coef(1), coef(2), ts.size()};
}

}  // namespace sortwave
