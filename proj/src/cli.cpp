#include "sortwave/cli.hpp"

#include "sortwave/canonical.hpp"
#include "sortwave/error.hpp"
#include "sortwave/frontsim.hpp"
#include "sortwave/parallel.hpp"
#include "sortwave/phase.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace sortwave::cli {

namespace {

constexpr std::array<std::pair<const char*, Subcommand>, 5> subcommands{{
    {"dispersion", Subcommand::dispersion},
    {"simulate", Subcommand::simulate},
    {"accelerate", Subcommand::accelerate},
    {"phase", Subcommand::phase},
    {"canonical", Subcommand::canonical},
}};

std::string valid_subcommands() {
    std::string out;
    for (const auto& [name, _] : subcommands) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw UsageError("invalid value for '" + key + "': '" + text + "'");
    }
    return v;
}

double parse_positive(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (!(v > 0.0)) throw UsageError("invalid value for '" + key + "': must be > 0");
    return v;
}

double parse_negative(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (!(v < 0.0)) throw UsageError("invalid value for '" + key + "': must be < 0");
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text, std::size_t min_value) {
    std::size_t v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || v < min_value) {
        throw UsageError("invalid value for '" + key + "': expected an integer >= " + std::to_string(min_value));
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw UsageError("invalid value for '" + key + "': expected true or false");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

struct Key {
    const char* name;  // config spelling; the flag is --name with '_' -> '-'
    bool is_flag;
    Setter set;
};

Setter positive(double RunConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_positive(k, v); };
}

Setter count(std::size_t RunConfig::*field, std::size_t min_value) {
    return [field, min_value](RunConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_count(k, v, min_value);
    };
}

Setter boolean(bool RunConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_bool(k, v); };
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"r", false, [](RunConfig& c, const std::string& k, const std::string& v) { c.params.r = parse_positive(k, v); }},
        {"alpha", false,
         [](RunConfig& c, const std::string& k, const std::string& v) { c.params.alpha = parse_positive(k, v); }},
        {"theta_max", false,
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.params.theta_max = parse_positive(k, v);
             c.theta_max_given = true;
         }},
        {"out", false,
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v.empty()) throw UsageError("invalid value for '" + k + "': empty path");
             c.out_dir = v;
         }},
        {"precision", false,
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const auto p = parse_count(k, v, 1);
             if (p > 17) throw UsageError("invalid value for '" + k + "': at most 17");
             c.precision = static_cast<int>(p);
         }},
        {"theta_nodes", false, count(&RunConfig::theta_nodes, 3)},
        {"lambda_count", false, count(&RunConfig::lambda_count, 2)},
        {"lambda_min", false,
         [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_min = parse_negative(k, v); }},
        {"lambda_max", false,
         [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_max = parse_negative(k, v); }},
        {"dx", false, positive(&RunConfig::dx)},
        {"dtheta", false, positive(&RunConfig::dtheta)},
        {"trait_nodes", false, count(&RunConfig::trait_nodes, 3)},
        {"dt", false, positive(&RunConfig::dt)},
        {"x_length", false, positive(&RunConfig::x_length)},
        {"t_end", false, positive(&RunConfig::t_end)},
        {"threshold", false,
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const double t = parse_positive(k, v);
             if (!(t < 1.0)) throw UsageError("invalid value for '" + k + "': must lie in (0, 1)");
             c.threshold = t;
         }},
        {"output_interval", false, positive(&RunConfig::output_interval)},
        {"trait_support", false, positive(&RunConfig::trait_support)},
        {"fit_from", false, positive(&RunConfig::fit_from)},
        {"fit_to", false, positive(&RunConfig::fit_to)},
        {"eikonal", true, boolean(&RunConfig::eikonal)},
        {"snapshot", true, boolean(&RunConfig::snapshot)},
        {"times", false,
         [](RunConfig& c, const std::string& k, const std::string& v) {
             std::vector<double> ts;
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) ts.push_back(parse_positive(k, trim(item)));
             if (ts.empty()) throw UsageError("invalid value for '" + k + "': empty list");
             c.times = ts;
         }},
        {"theta_samples", false, count(&RunConfig::theta_samples, 2)},
        {"t0", false, positive(&RunConfig::t0)},
        {"t1", false, positive(&RunConfig::t1)},
        {"x_lo", false, positive(&RunConfig::x_lo)},
        {"x_hi", false, positive(&RunConfig::x_hi)},
        {"nx", false, count(&RunConfig::nx, 3)},
    };
    return table;
}

const Key* find_key(const std::string& name) {
    std::string normalized = name;
    std::replace(normalized.begin(), normalized.end(), '-', '_');
    for (const auto& k : keys()) {
        if (normalized == k.name) return &k;
    }
    return nullptr;
}

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        const Key* k = find_key(key);
        if (k == nullptr) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        k->set(config, k->name, value);
    }
}

void validate(const RunConfig& c) {
    if (c.lambda_min != 0.0 && c.lambda_max != 0.0 && !(c.lambda_min < c.lambda_max)) {
        throw UsageError("invalid value for 'lambda_min': must be below lambda_max");
    }
    if (!(c.x_lo < c.x_hi)) throw UsageError("invalid value for 'x_lo': must be below x_hi");
    if (!(c.t0 < c.t1)) throw UsageError("invalid value for 't0': must be below t1");
    if (c.fit_to != 0.0 && !(c.fit_from < c.fit_to)) {
        throw UsageError("invalid value for 'fit_from': must be below fit_to");
    }
}

// ---- output ----

class Formatter {
public:
    explicit Formatter(int precision) : precision_(precision) {}

    std::string operator()(double v) const {
        std::array<char, 64> buf{};
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, precision_);
        return std::string(buf.data(), res.ptr);
    }

private:
    int precision_;
};

class Output {
public:
    Output(const std::filesystem::path& dir, const std::string& name) : path_(dir / name), file_(path_) {
        if (!file_) throw std::runtime_error("cannot write " + path_.string());
    }
    ~Output() = default;

    std::ofstream& stream() { return file_; }

    void close() {
        file_.close();
        if (!file_) throw std::runtime_error("failed writing " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream file_;
};

struct Summary {
    std::vector<std::pair<std::string, std::string>> rows;

    void add(const std::string& key, const std::string& value) { rows.emplace_back(key, value); }
};

void write_summary(const std::filesystem::path& dir, const Summary& s) {
    Output out(dir, "summary.txt");
    for (const auto& [k, v] : s.rows) out.stream() << k << " = " << v << '\n';
    out.close();
}

Summary echo(const RunConfig& c, const Formatter& f) {
    Summary s;
    s.add("subcommand", subcommand_name(c.subcommand));
    s.add("r", f(c.params.r));
    s.add("alpha", f(c.params.alpha));
    s.add("theta_max", f(c.params.theta_max));
    s.add("precision", std::to_string(c.precision));
    return s;
}

std::string flag(bool b) { return b ? "true" : "false"; }

// ---- pipelines ----

void run_dispersion(const RunConfig& c, const std::filesystem::path& dir, const Formatter& f, std::ostream& log) {
    const ModelParams& p = c.params;
    MinimalSpeedOptions opts;
    opts.theta_nodes = c.theta_nodes;
    const MinimalSpeedResult ms = minimal_speed(p, opts);
    const EdgeDiagnostics star = edge_diagnostics(ms.mode_star, p, true);

    const double scale = std::sqrt(p.r / p.theta_max);
    const double lo = c.lambda_min != 0.0 ? c.lambda_min : -8.0 * scale;
    const double hi = c.lambda_max != 0.0 ? c.lambda_max : -scale / 8.0;
    if (!(lo < hi)) throw UsageError("invalid value for 'lambda_min': must be below lambda_max");
    const std::vector<double> lambdas = SpeedTable::lambda_grid(lo, hi, c.lambda_count);
    const Grid1D theta_grid(0.0, p.theta_max, c.theta_nodes);
    std::vector<DispersionMode> modes(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t k) { modes[k] = dispersion_mode(p, lambdas[k], theta_grid); });

    double worst_identity = 0.0;
    double worst_mean_theta = 0.0;
    {
        Output out(dir, "dispersion.csv");
        out.stream() << "lambda,c,mean_theta_edge\n";
        for (const DispersionMode& m : modes) {
            const EdgeDiagnostics d = edge_diagnostics(m, p);
            worst_identity = std::max(worst_identity, std::abs(d.integrated_identity_residual));
            worst_mean_theta = std::max(worst_mean_theta, std::abs(d.mean_theta_identity_residual));
            out.stream() << f(m.lambda) << ',' << f(m.speed) << ',' << f(m.mean_theta_edge) << '\n';
        }
        out.close();
    }
    {
        Output out(dir, "mode_star.csv");
        out.stream() << "theta,Q\n";
        for (std::size_t j = 0; j < ms.mode_star.q.size(); ++j) {
            out.stream() << f(theta_grid.node(j)) << ',' << f(ms.mode_star.q[j]) << '\n';
        }
        out.close();
    }

    Summary s = echo(c, f);
    s.add("theta_nodes", std::to_string(c.theta_nodes));
    s.add("eigen_tol", f(PowerIterationOptions{}.eigen_tol));
    s.add("vector_tol", f(PowerIterationOptions{}.vector_tol));
    s.add("lambda_rel_tol", f(opts.lambda_rel_tol));
    s.add("lambda_count", std::to_string(c.lambda_count));
    s.add("lambda_min", f(lo));
    s.add("lambda_max", f(hi));
    s.add("c_star", f(ms.c_star));
    s.add("lambda_star", f(ms.lambda_star));
    s.add("bracket_low", f(ms.bracket_low));
    s.add("bracket_high", f(ms.bracket_high));
    s.add("c_prime_at_lambda_star", f(ms.derivative));
    s.add("mean_theta_edge", f(star.mean_theta_edge));
    s.add("fisher_term", f(star.fisher_term));
    s.add("integrated_identity_residual", f(star.integrated_identity_residual));
    s.add("mean_theta_identity_residual", f(star.mean_theta_identity_residual));
    s.add("cstar_residual", f(*star.cstar_residual));
    s.add("cstar_squared_formula", f(*star.cstar_squared_formula));
    s.add("cstar_squared_residual", f(*star.cstar_squared_residual));
    s.add("kpp_speed_squared", f(*star.kpp_speed_squared));
    s.add("kpp_underestimates", flag(*star.kpp_underestimates));
    s.add("scan_max_integrated_identity_residual", f(worst_identity));
    s.add("scan_max_mean_theta_identity_residual", f(worst_mean_theta));
    write_summary(dir, s);
    log << "c_star = " << f(ms.c_star) << ", lambda_star = " << f(ms.lambda_star) << '\n';
}

void write_track(const std::filesystem::path& dir, const FrontTrack& track, const Formatter& f) {
    Output out(dir, "front_track.csv");
    out.stream() << "t,x_front\n";
    for (std::size_t k = 0; k < track.times.size(); ++k) {
        out.stream() << f(track.times[k]) << ',' << f(track.positions[k]) << '\n';
    }
    out.close();
}

void write_snapshot(const std::filesystem::path& dir, const TraitField& field, const Formatter& f) {
    Output out(dir, "snapshot.csv");
    out.stream() << "x,theta,n\n";
    for (std::size_t j = 0; j < field.ntheta(); ++j) {
        for (std::size_t i = 0; i < field.nx(); ++i) {
            out.stream() << f(field.grid_x.node(i)) << ',' << f(field.grid_theta.node(j)) << ',' << f(field.at(i, j))
                         << '\n';
        }
    }
    out.close();
}

void run_simulate(const RunConfig& c, const std::filesystem::path& dir, const Formatter& f, std::ostream& log) {
    const ModelParams& p = c.params;
    p.validate();
    const double unit_x = std::sqrt(p.theta_max / p.r);
    const double dx = c.dx > 0.0 ? c.dx : 0.05 * unit_x;
    const double c_guess = 2.0 * std::sqrt(p.r * p.theta_max);
    const double dt = c.dt > 0.0 ? c.dt : std::min(0.05 / p.r, dx / (4.0 * c_guess));
    const double t_end = c.t_end > 0.0 ? c.t_end : 60.0 / p.r;
    const double width = c.x_length > 0.0 ? c.x_length : 120.0 * unit_x;
    const double threshold = c.threshold > 0.0 ? c.threshold : 0.5;
    const double interval = c.output_interval > 0.0 ? c.output_interval : 0.25 / p.r;
    const auto nx = static_cast<std::size_t>(std::llround(width / dx)) + 1;

    const Grid1D gx(-0.25 * width, 0.75 * width, nx);
    const Grid1D gt(0.0, p.theta_max, c.trait_nodes);
    const double level = 1.0 / p.theta_max;
    TraitField init = smoothed_step_field(gx, gt, [level](double) { return level; }, 5.0 * gx.spacing());
    TrackConfig tc;
    tc.threshold = threshold;
    tc.output_interval = interval;
    tc.moving_window = true;
    const SimulationResult sim = simulate(p, std::move(init), t_end, dt, tc);
    const DelayedSpeedFit fit = fit_delayed_front_speed(sim.track, t_end / 3.0);
    const double linear = fit_front_speed(sim.track, t_end / 2.0);
    const MinimalSpeedResult ms = minimal_speed(p);

    write_track(dir, sim.track, f);
    if (c.snapshot) write_snapshot(dir, sim.field, f);

    Summary speed;
    speed.add("speed", f(fit.speed));
    speed.add("log_coefficient", f(fit.log_coefficient));
    speed.add("linear_speed", f(linear));
    speed.add("c_star", f(ms.c_star));
    speed.add("relative_error", f((fit.speed - ms.c_star) / ms.c_star));

    Summary s = echo(c, f);
    s.add("dx", f(gx.spacing()));
    s.add("nx", std::to_string(nx));
    s.add("trait_nodes", std::to_string(c.trait_nodes));
    s.add("dt", f(dt));
    s.add("t_end", f(t_end));
    s.add("x_length", f(width));
    s.add("threshold", f(threshold));
    s.add("output_interval", f(interval));
    s.add("fit_from", f(t_end / 3.0));
    s.add("window_shifts", std::to_string(sim.window_shifts));
    s.add("min_density", f(sim.min_density));

    if (c.eikonal) {
        const double k_init = 3.0 * std::abs(ms.lambda_star);
        const double length = 1.2 * c_guess * t_end + 10.0 * unit_x;
        const auto ne = static_cast<std::size_t>(std::llround(length / dx)) + 1;
        const Grid1D ge(-5.0 * unit_x, -5.0 * unit_x + length, ne);
        std::vector<double> u0(ne);
        for (std::size_t i = 0; i < ne; ++i) u0[i] = -k_init * std::max(ge.node(i), 0.0);
        const SpeedTable table =
            SpeedTable::from_dispersion(p, SpeedTable::lambda_grid(-8.0 / unit_x, -0.125 / unit_x, 64));
        // mu0' = 2 lambda <theta> <= 2 theta_max |lambda| bounds the slope of H
        const double dt_e = 0.5 * ge.spacing() / (2.0 * p.theta_max * k_init);
        EikonalOptions eo;
        eo.output_interval = 1.0 / p.r;
        eo.keep_snapshots = true;
        const EikonalResult er = eikonal_propagate(table, ge, u0, t_end, dt_e, eo);
        FrontTrack et{er.times, er.fronts, 0.0};
        const double e_speed = fit_front_speed(et, t_end / 2.0);
        Output out(dir, "eikonal.csv");
        out.stream() << "t,x,u\n";
        for (std::size_t k = 0; k < er.times.size(); ++k) {
            for (std::size_t i = 0; i < ne; ++i) {
                out.stream() << f(er.times[k]) << ',' << f(ge.node(i)) << ',' << f(er.snapshots[k][i]) << '\n';
            }
        }
        out.close();
        speed.add("eikonal_speed", f(e_speed));
        speed.add("eikonal_relative_error", f((e_speed - ms.c_star) / ms.c_star));
        s.add("eikonal_dx", f(ge.spacing()));
        s.add("eikonal_dt", f(dt_e));
        s.add("eikonal_initial_slope", f(k_init));
        s.add("eikonal_used_envelope", flag(er.used_envelope));
    }

    {
        Output out(dir, "speed.txt");
        for (const auto& [k, v] : speed.rows) out.stream() << k << " = " << v << '\n';
        out.close();
    }
    write_summary(dir, s);
    log << "speed = " << f(fit.speed) << " (c_star = " << f(ms.c_star) << ")\n";
}

void run_accelerate(const RunConfig& c, const std::filesystem::path& dir, const Formatter& f, std::ostream& log) {
    ModelParams p = c.params;
    const double t_end = c.t_end > 0.0 ? c.t_end : 10.0;
    if (!c.theta_max_given) p.theta_max = 4.0 * std::sqrt(p.r * p.alpha) * t_end;
    p.validate();
    const double dx = c.dx > 0.0 ? c.dx : 0.1;
    const double dtheta = c.dtheta > 0.0 ? c.dtheta : 0.1;
    const double dt = c.dt > 0.0 ? c.dt : std::min(0.05 / p.r, dx / (8.0 * std::sqrt(p.r * p.theta_max)));
    const double x_edge = 4.0 / 3.0 * std::pow(p.alpha, 0.25) * std::pow(p.r, 0.75) * std::pow(t_end, 1.5);
    const double width = c.x_length > 0.0 ? c.x_length : 2.0 * x_edge;
    const double threshold = c.threshold > 0.0 ? c.threshold : 0.01;
    const double interval = c.output_interval > 0.0 ? c.output_interval : 0.1;
    const double fit_to = c.fit_to > 0.0 ? c.fit_to : t_end;
    const double support = std::min(c.trait_support, p.theta_max);

    const auto nx = static_cast<std::size_t>(std::llround(width / dx)) + 1;
    const auto nt = static_cast<std::size_t>(std::llround(p.theta_max / dtheta)) + 1;
    const Grid1D gx(-0.25 * width, 0.75 * width, nx);
    const Grid1D gt(0.0, p.theta_max, nt);
    TraitField init = smoothed_step_field(
        gx, gt, [support](double th) { return th <= support ? 1.0 / support : 0.0; }, 5.0 * gx.spacing());
    TrackConfig tc;
    tc.threshold = threshold;
    tc.output_interval = interval;
    tc.moving_window = true;
    const SimulationResult sim = simulate(p, std::move(init), t_end, dt, tc);
    const PowerLawFit fit = fit_power_law(sim.track, c.fit_from, fit_to);
    write_track(dir, sim.track, f);
    if (c.snapshot) write_snapshot(dir, sim.field, f);

    {
        Output out(dir, "fit.txt");
        out.stream() << "exponent = " << f(fit.exponent) << '\n'
                     << "prefactor = " << f(fit.prefactor) << '\n'
                     << "r_squared = " << f(fit.r_squared) << '\n'
                     << "samples = " << (fit.last - fit.first) << '\n'
                     << "fit_from = " << f(c.fit_from) << '\n'
                     << "fit_to = " << f(fit_to) << '\n'
                     << "x_front_final = " << f(sim.track.positions.back()) << '\n'
                     << "x_edge_final = " << f(x_edge) << '\n';
        out.close();
    }
    Summary s = echo(c, f);
    s.add("theta_max_used", f(p.theta_max));
    s.add("dx", f(gx.spacing()));
    s.add("nx", std::to_string(nx));
    s.add("dtheta", f(gt.spacing()));
    s.add("ntheta", std::to_string(nt));
    s.add("dt", f(dt));
    s.add("t_end", f(t_end));
    s.add("x_length", f(width));
    s.add("threshold", f(threshold));
    s.add("trait_support", f(support));
    s.add("output_interval", f(interval));
    s.add("window_shifts", std::to_string(sim.window_shifts));
    s.add("min_density", f(sim.min_density));
    write_summary(dir, s);
    log << "exponent = " << f(fit.exponent) << '\n';
}

void run_phase(const RunConfig& c, const std::filesystem::path& dir, const Formatter& f, std::ostream& log) {
    const PhaseParams pp{c.params.r, c.params.alpha};
    pp.validate();
    Output nullset(dir, "nullset.csv");
    nullset.stream() << "t,theta,x\n";
    Output edge(dir, "edge.csv");
    edge.stream() << "t,x_edge,theta_edge,scan_x,scan_theta\n";
    double worst = 0.0;
    for (double t : c.times) {
        const double spread = 2.0 * std::sqrt(pp.r * pp.alpha) * t;
        const Grid1D gth(0.0, spread, std::max<std::size_t>(c.theta_samples, 3));
        for (std::size_t j = 0; j < gth.size(); ++j) {
            const double th = std::min(gth.node(j), spread);
            const double x = nullset_x(t, th, pp);
            worst = std::max(worst, std::abs(phase_free(t, x, th, pp)));
            nullset.stream() << f(t) << ',' << f(th) << ',' << f(x) << '\n';
        }
        const EdgeLocation e = edge_location(t, pp);
        edge.stream() << f(t) << ',' << f(e.x_edge) << ',' << f(e.theta_edge) << ',' << f(e.scan_x) << ','
                      << f(e.scan_theta) << '\n';
    }
    nullset.close();
    edge.close();
    Summary s = echo(c, f);
    std::string ts;
    for (double t : c.times) ts += (ts.empty() ? "" : ",") + f(t);
    s.add("times", ts);
    s.add("theta_samples", std::to_string(c.theta_samples));
    s.add("max_nullset_phase", f(worst));
    write_summary(dir, s);
    log << "max |u0| on nullset = " << f(worst) << '\n';
}

void run_canonical(const RunConfig& c, const std::filesystem::path& dir, const Formatter& f, std::ostream& log) {
    const PhaseParams pp{c.params.r, c.params.alpha};
    pp.validate();
    const Grid1D gx(c.x_lo, c.x_hi, c.nx);
    const double dx = gx.spacing();
    const double theta_top = 2.0 * explicit_selected_trait(c.x_hi, pp) + 1.0;
    const double dtheta = c.dtheta > 0.0 ? c.dtheta : dx;
    const auto ntheta = static_cast<std::size_t>(std::llround(theta_top / dtheta)) + 1;
    const Grid1D gth(0.0, theta_top, ntheta);

    const SelectedTraitField start = extract_selected_trait(c.t0, gx, gth, pp);
    const PhaseOracle oracle = explicit_phase_oracle(pp);
    double a_max = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        const PhaseDerivatives d = oracle(c.t0, gx.node(i), start.theta_bar[i]);
        a_max = std::max(a_max, std::abs(2.0 * start.theta_bar[i] * d.du_dx));
    }
    const double dt = c.dt > 0.0 ? c.dt : 0.5 * dx / std::max(a_max, 1e-12);

    const SelectedTraitField next = extract_selected_trait(c.t0 + dt, gx, gth, pp);
    const CanonicalResidual res = canonical_residual(start, next, oracle);
    const BurgersResult solved = burgers_solve(start, oracle, c.t1, dt);
    double tracking = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        tracking = std::max(tracking, std::abs(solved.field.theta_bar[i] - explicit_selected_trait(gx.node(i), pp)));
    }

    {
        Output out(dir, "theta_bar.csv");
        out.stream() << "t,x,theta_bar\n";
        for (const SelectedTraitField* field : {&start, &solved.field}) {
            for (std::size_t i = 0; i < gx.size(); ++i) {
                out.stream() << f(field->time) << ',' << f(gx.node(i)) << ',' << f(field->theta_bar[i]) << '\n';
            }
        }
        out.close();
    }
    {
        Output out(dir, "residual.txt");
        out.stream() << "extracted_residual_max = " << f(res.max_abs) << '\n'
                     << "burgers_max_error = " << f(tracking) << '\n'
                     << "burgers_steps = " << solved.steps << '\n'
                     << "min_transport_speed = " << f(solved.min_transport_speed) << '\n'
                     << "max_gradient = " << f(solved.max_gradient) << '\n';
        out.close();
    }
    Summary s = echo(c, f);
    s.add("t0", f(c.t0));
    s.add("t1", f(c.t1));
    s.add("x_lo", f(c.x_lo));
    s.add("x_hi", f(c.x_hi));
    s.add("nx", std::to_string(c.nx));
    s.add("dtheta", f(gth.spacing()));
    s.add("ntheta", std::to_string(ntheta));
    s.add("dt", f(dt));
    s.add("cfl", f(BurgersOptions{}.cfl));
    write_summary(dir, s);
    log << "residual = " << f(res.max_abs) << ", burgers error = " << f(tracking) << '\n';
}

}  // namespace

const char* subcommand_name(Subcommand s) noexcept {
    for (const auto& [name, value] : subcommands) {
        if (value == s) return name;
    }
    return "?";
}

RunConfig parse_config(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError("missing subcommand; valid subcommands: " + valid_subcommands());
    RunConfig config;
    const auto sub = std::find_if(subcommands.begin(), subcommands.end(),
                                  [&](const auto& entry) { return args[0] == entry.first; });
    if (sub == subcommands.end()) {
        throw UsageError("unknown subcommand '" + args[0] + "'; valid subcommands: " + valid_subcommands());
    }
    config.subcommand = sub->second;

    CLI::App app(std::string("sortwave ") + sub->first);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file applied before the flags");
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    for (const Key& k : keys()) {
        std::string flag_name = k.name;
        std::replace(flag_name.begin(), flag_name.end(), '_', '-');
        flag_name = "--" + flag_name;
        if (k.is_flag) {
            options[k.name] = app.add_flag(flag_name);
        } else {
            options[k.name] = app.add_option(flag_name, values[k.name]);
        }
    }
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes the vector from the back
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const Key& k : keys()) {
        CLI::Option* opt = options.at(k.name);
        if (opt->count() == 0) continue;
        k.set(config, k.name, k.is_flag ? "true" : values[k.name]);
    }
    validate(config);
    return config;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
    try {
        const std::filesystem::path dir(config.out_dir);
        std::filesystem::create_directories(dir);
        const Formatter f(config.precision);
        switch (config.subcommand) {
            case Subcommand::dispersion: run_dispersion(config, dir, f, log); break;
            case Subcommand::simulate: run_simulate(config, dir, f, log); break;
            case Subcommand::accelerate: run_accelerate(config, dir, f, log); break;
            case Subcommand::phase: run_phase(config, dir, f, log); break;
            case Subcommand::canonical: run_canonical(config, dir, f, log); break;
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
        std::cout << "usage: sortwave <" << valid_subcommands() << "> [--config FILE] [--key value ...]\n";
        return 0;
    }
    RunConfig config;
    try {
        config = parse_config(args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    return run(config, std::cout, std::cerr);
}

}  // namespace sortwave::cli
