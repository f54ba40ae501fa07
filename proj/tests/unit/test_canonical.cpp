#include "oracles.hpp"

#include "sortwave/canonical.hpp"
#include "sortwave/error.hpp"
#include "sortwave/phase.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sortwave;

namespace {

const PhaseParams unit_params{1.0, 1.0};

double golden_trait(double t, double x, const PhaseParams& p, double hi) {
    const auto f = [&](double th) { return -phase_free(t, x, th, p); };
    return oracle::golden_min(f, 0.0, hi, 1e-12).first;
}

// root of the centred-difference first-order condition; sharper than golden
// section, which stalls at sqrt(eps) on a flat maximum
double stationary_trait(double t, double x, const PhaseParams& p, double lo, double hi) {
    const double h = 1e-5;
    const auto du = [&](double th) { return phase_free(t, x, th + h, p) - phase_free(t, x, th - h, p); };
    return oracle::bisect(du, lo, hi);
}

// log-log least-squares slope of err against dx
double fitted_order(const std::vector<double>& dx, const std::vector<double>& err) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(dx.size());
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double lx = std::log(dx[i]);
        const double ly = std::log(err[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SelectedTraitField closed_form_field(double t, const Grid1D& g, const PhaseParams& p) {
    SelectedTraitField f{g, std::vector<double>(g.size()), t};
    for (std::size_t i = 0; i < g.size(); ++i) f.theta_bar[i] = explicit_selected_trait(g.node(i), p);
    return f;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::invalid_argument;
}

double max_error(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

}  // namespace

TEST_SUITE("canonical") {

TEST_CASE("parabolic selection") {
    const Grid1D g(0.0, 1.0, 1001);
    std::vector<double> u(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) u[j] = -(g.node(j) - 0.37) * (g.node(j) - 0.37);
    CHECK(std::abs(selected_trait(u, g) - 0.37) <= 1e-10);

    CHECK(kind_of([&] { (void)selected_trait(std::vector<double>(g.size(), -1.0), g); }) ==
          ErrorKind::selection_at_boundary);
    std::vector<double> rising(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) rising[j] = g.node(j);
    CHECK(kind_of([&] { (void)selected_trait(rising, g); }) == ErrorKind::selection_at_boundary);
    CHECK_THROWS_AS(selected_trait(std::vector<double>(3, 0.0), g), Error);
}

TEST_CASE("selection from the explicit phase matches a maximization oracle") {
    const Grid1D g(0.0, 4.0, 40001);
    for (double x : {2.0, 2.5, 3.0}) {
        std::vector<double> u(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) u[j] = phase_value(1.0, x, g.node(j), unit_params).u0_free;
        const double golden = golden_trait(1.0, x, unit_params, 4.0);
        const double expected = stationary_trait(1.0, x, unit_params, golden - 0.01, golden + 0.01);
        CHECK(std::abs(golden - expected) <= 1e-6);
        CHECK(std::abs(selected_trait(u, g) - expected) <= 1e-8);
    }
}

TEST_CASE("closed-form selected trait") {
    const PhaseParams p{1.5, 0.7};
    for (double t : {1.0, 2.5}) {
        for (double x : {0.5, 2.0, 4.0}) {
            const double expected = golden_trait(t, x, p, 10.0);
            CHECK(std::abs(explicit_selected_trait(x, p) - expected) <= 1e-6);
        }
    }
    CHECK(explicit_selected_trait(-2.0, p) == explicit_selected_trait(2.0, p));

    // the closed form solves the steady canonical equation; theta_bar' = (2/3) theta_bar / x
    const auto oracle = explicit_phase_oracle(p);
    for (double x : {2.0, 3.0, 4.0}) {
        const double th = explicit_selected_trait(x, p);
        const auto d = oracle(1.0, x, th);
        CHECK(d.u < 0.0);
        CHECK(d.d2u_dthetatheta < 0.0);
        const double lhs = -2.0 * th * d.du_dx * (2.0 / 3.0) * th / x;
        const double rhs = d.du_dx * d.du_dx / -d.d2u_dthetatheta;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("explicit oracle derivatives agree with finite differences") {
    const auto oracle = explicit_phase_oracle(unit_params);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(1.0, 4.0), uth(0.2, 2.0);
    const double h = 1e-4;
    for (int k = 0; k < 20; ++k) {
        const double x = ux(rng);
        const double th = uth(rng);
        const auto d = oracle(1.5, x, th);
        const auto u = [&](double xx, double tt) { return phase_free(1.5, xx, tt, unit_params); };
        CHECK(d.u == doctest::Approx(u(x, th)).epsilon(1e-14));
        CHECK(std::abs(d.du_dx - (u(x + h, th) - u(x - h, th)) / (2.0 * h)) <= 1e-6);
        CHECK(std::abs(d.d2u_dthetatheta - (u(x, th + h) - 2.0 * u(x, th) + u(x, th - h)) / (h * h)) <= 1e-5);
    }
}

TEST_CASE("extraction over x") {
    const Grid1D gx(2.0, 3.0, 11);
    const Grid1D gth(0.0, 4.0, 401);
    const auto field = extract_selected_trait(1.0, gx, gth, unit_params);
    CHECK(field.time == 1.0);
    for (std::size_t i = 0; i < gx.size(); ++i) {
        CHECK(std::abs(field.theta_bar[i] - explicit_selected_trait(gx.node(i), unit_params)) <= 1e-4);
    }
    // time independent for this phase
    const auto later = extract_selected_trait(2.0, gx, gth, unit_params);
    CHECK(max_error(field.theta_bar, later.theta_bar) <= 1e-4);
    // trait grid too short for the maximum
    CHECK(kind_of([&] { (void)extract_selected_trait(1.0, gx, Grid1D(0.0, 0.5, 51), unit_params); }) ==
          ErrorKind::selection_at_boundary);
}

TEST_CASE("burgers with zero gradient leaves theta_bar unchanged") {
    const Grid1D g(0.0, 1.0, 51);
    SelectedTraitField init{g, std::vector<double>(g.size()), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) init.theta_bar[i] = 1.0 + std::sin(3.0 * g.node(i));
    const auto r = burgers_solve(init, uniform_phase_oracle(0.0, 1.0), 1.0, 0.01);
    CHECK(r.field.theta_bar == init.theta_bar);
    CHECK(r.steps == 100);
    CHECK(r.field.time == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("burgers uniform field follows the source ODE") {
    const double g = 0.8, m = 2.0, theta0 = 0.6;
    const Grid1D grid(0.0, 1.0, 101);
    SelectedTraitField init{grid, std::vector<double>(grid.size(), theta0), 0.0};
    BurgersOptions o;
    o.inflow = [&](double t) { return theta0 + g * g / m * t; };
    const auto r = burgers_solve(init, uniform_phase_oracle(g, m), 2.0, 0.001, o);
    const double expected = theta0 + g * g / m * 2.0;
    for (double v : r.field.theta_bar) CHECK(std::abs(v - expected) <= 1e-8);
    CHECK(r.min_transport_speed > 0.0);

    // without the inflow the held left value is carried into the domain
    const auto held = burgers_solve(init, uniform_phase_oracle(g, m), 2.0, 0.001);
    CHECK(held.field.theta_bar.front() == theta0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(held.field.theta_bar[i] >= held.field.theta_bar[i - 1]);
        CHECK(held.field.theta_bar[i] <= expected + 1e-12);
    }
}

TEST_CASE("burgers tracks the manufactured selected trait at first order") {
    const auto oracle = explicit_phase_oracle(unit_params);
    std::vector<double> errors;
    for (std::size_t n : {51, 101, 201}) {
        const Grid1D gx(2.0, 3.0, n);
        const auto init = closed_form_field(1.0, gx, unit_params);
        double a_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a_max = std::max(a_max, std::abs(-2.0 * init.theta_bar[i] * oracle(1.0, gx.node(i), init.theta_bar[i]).du_dx));
        }
        const double dt = 0.5 * gx.spacing() / a_max;
        const auto r = burgers_solve(init, oracle, 2.0, dt);
        CHECK(r.min_transport_speed > 0.0);
        errors.push_back(max_error(r.field.theta_bar, closed_form_field(2.0, gx, unit_params).theta_bar));
    }
    CHECK(errors[0] > errors[1]);
    CHECK(errors[1] > errors[2]);
    CHECK(oracle::observed_order(errors[0], errors[1]) >= 0.8);
    CHECK(oracle::observed_order(errors[1], errors[2]) >= 0.8);
}

TEST_CASE("upwind step preserves ordering") {
    const Grid1D g(0.0, 2.0, 101);
    SelectedTraitField low{g, std::vector<double>(g.size()), 0.0};
    SelectedTraitField high = low;
    for (std::size_t i = 0; i < g.size(); ++i) {
        low.theta_bar[i] = 1.0 + 0.2 * std::sin(2.0 * g.node(i));
        high.theta_bar[i] = low.theta_bar[i] + 0.05 + 0.05 * std::cos(5.0 * g.node(i)) * std::cos(5.0 * g.node(i));
    }
    const auto oracle = uniform_phase_oracle(1.0, 3.0);
    const double dt = 0.5 * g.spacing() / (2.0 * 1.5);
    const auto a = burgers_solve(low, oracle, dt, dt);
    const auto b = burgers_solve(high, oracle, dt, dt);
    REQUIRE(a.steps == 1);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(b.field.theta_bar[i] >= a.field.theta_bar[i]);
    // source is nonnegative, so a uniform field never decreases
    SelectedTraitField flat{g, std::vector<double>(g.size(), 1.0), 0.0};
    for (double v : burgers_solve(flat, oracle, 10 * dt, dt).field.theta_bar) CHECK(v >= 1.0);
}

TEST_CASE("burgers structured errors") {
    const Grid1D g(-5.0, 5.0, 201);
    SelectedTraitField init{g, std::vector<double>(g.size()), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) init.theta_bar[i] = 2.0 - std::tanh(g.node(i));

    CHECK(kind_of([&] { (void)burgers_solve(init, uniform_phase_oracle(1.0, 1.0), 1.0, 0.1); }) ==
          ErrorKind::cfl_violation);
    CHECK(kind_of([&] { (void)burgers_solve(init, uniform_phase_oracle(1.0, 0.0), 1.0, 0.001); }) ==
          ErrorKind::oracle_degenerate);
    CHECK(kind_of([&] { (void)burgers_solve(init, uniform_phase_oracle(1.0, 1e-13), 1.0, 0.001); }) ==
          ErrorKind::oracle_degenerate);

    // decreasing data steepen into a shock near t = 1/(2 g max|theta_x|) = 0.5
    BurgersOptions o;
    o.blow_up_factor = 5.0;
    CHECK(kind_of([&] { (void)burgers_solve(init, uniform_phase_oracle(1.0, 1e6), 3.0, 0.005, o); }) ==
          ErrorKind::gradient_blow_up);

    CHECK_THROWS_AS(burgers_solve(init, uniform_phase_oracle(1.0, 1.0), 1.0, 0.0), Error);
    SelectedTraitField wrong{g, std::vector<double>(3, 1.0), 0.0};
    CHECK_THROWS_AS(burgers_solve(wrong, uniform_phase_oracle(1.0, 1.0), 1.0, 0.001), Error);
}

TEST_CASE("canonical residual") {
    const Grid1D g(0.0, 1.0, 21);
    SUBCASE("uniform analytic case") {
        const double gg = 0.8, m = 2.0;
        const SelectedTraitField a{g, std::vector<double>(g.size(), 0.6), 1.0};
        const SelectedTraitField b{g, std::vector<double>(g.size(), 0.6 + gg * gg / m * 0.01), 1.01};
        const auto res = canonical_residual(a, b, uniform_phase_oracle(gg, m));
        CHECK(res.values.size() == g.size() - 2);
        CHECK(res.max_abs <= 1e-8);
    }
    SUBCASE("zero-gradient oracle on a constant field") {
        const SelectedTraitField a{g, std::vector<double>(g.size(), 0.6), 1.0};
        SelectedTraitField b = a;
        b.time = 2.0;
        const auto res = canonical_residual(a, b, uniform_phase_oracle(0.0, 1.0));
        CHECK(res.max_abs == 0.0);
    }
    SUBCASE("extracted trait converges at first order") {
        const auto oracle = explicit_phase_oracle(unit_params);
        // single refinements carry grid-alignment noise, so fit over five levels
        const std::vector<double> steps{0.04, 0.02, 0.01, 0.005, 0.0025};
        std::vector<double> residuals;
        for (double dx : steps) {
            const auto n = static_cast<std::size_t>(std::llround(1.0 / dx)) + 1;
            const Grid1D gx(2.0, 3.0, n);
            const Grid1D gth(0.0, 4.0, static_cast<std::size_t>(std::llround(4.0 / dx)) + 1);
            const auto a = extract_selected_trait(1.0, gx, gth, unit_params);
            const auto b = extract_selected_trait(1.0 + dx, gx, gth, unit_params);
            residuals.push_back(canonical_residual(a, b, oracle).max_abs);
        }
        CHECK(fitted_order(steps, residuals) >= 0.9);
        CHECK(residuals.back() < residuals.front());
    }
    SUBCASE("closed form has only the centred-difference error") {
        const auto oracle = explicit_phase_oracle(unit_params);
        const Grid1D gx(2.0, 3.0, 101);
        const auto res = canonical_residual(closed_form_field(1.0, gx, unit_params),
                                            closed_form_field(1.5, gx, unit_params), oracle);
        CHECK(res.max_abs <= 1e-3);
    }
    SUBCASE("mismatched levels") {
        const SelectedTraitField a{g, std::vector<double>(g.size(), 0.6), 1.0};
        CHECK_THROWS_AS(canonical_residual(a, a, uniform_phase_oracle(1.0, 1.0)), Error);
        const SelectedTraitField c{Grid1D(0.0, 1.0, 11), std::vector<double>(11, 0.6), 2.0};
        CHECK_THROWS_AS(canonical_residual(a, c, uniform_phase_oracle(1.0, 1.0)), Error);
    }
}

}  // TEST_SUITE
