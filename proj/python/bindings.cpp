#include "sortwave/canonical.hpp"
#include "sortwave/core.hpp"
#include "sortwave/dispersion.hpp"
#include "sortwave/error.hpp"
#include "sortwave/frontsim.hpp"
#include "sortwave/parallel.hpp"
#include "sortwave/phase.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sortwave;

PYBIND11_MODULE(_sortwave, m) {
    m.doc() = "Trait-structured invasion fronts: dispersion, PDE fronts, explicit phase, canonical equation";

    // messages start with the error name, e.g. "outside support: ..."
    py::register_exception<Error>(m, "SortwaveError", PyExc_RuntimeError);

    m.def("thread_count", &thread_count);
    m.def("set_thread_count", &set_thread_count, py::arg("threads"));

    // core
    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init<double, double, std::size_t>(), py::arg("lo"), py::arg("hi"), py::arg("n"))
        .def_property_readonly("lo", &Grid1D::lo)
        .def_property_readonly("hi", &Grid1D::hi)
        .def_property_readonly("size", &Grid1D::size)
        .def_property_readonly("spacing", &Grid1D::spacing)
        .def("node", &Grid1D::node)
        .def("nodes", &Grid1D::nodes);
    m.def(
        "tridiag_solve",
        [](std::vector<double> sub, std::vector<double> diag, std::vector<double> sup, std::vector<double> rhs) {
            return tridiag_solve(TridiagonalSystem{std::move(sub), std::move(diag), std::move(sup), std::move(rhs)});
        },
        py::arg("sub"), py::arg("diag"), py::arg("sup"), py::arg("rhs"));
    m.def(
        "trapezoid", [](const std::vector<double>& v, double h) { return trapezoid(v, h); }, py::arg("values"),
        py::arg("h"));
    m.def("depressed_cubic_root", &depressed_cubic_root, py::arg("p"), py::arg("q"));

    // dispersion
    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double r, double alpha, double theta_max) { return ModelParams{r, alpha, theta_max}; }),
             py::arg("r") = 1.0, py::arg("alpha") = 1.0, py::arg("theta_max") = 1.0)
        .def_readwrite("r", &ModelParams::r)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("theta_max", &ModelParams::theta_max);
    py::class_<PrincipalMode>(m, "PrincipalMode")
        .def_readonly("mu0", &PrincipalMode::mu0)
        .def_readonly("q", &PrincipalMode::q)
        .def_readonly("iterations", &PrincipalMode::iterations)
        .def_readonly("residual", &PrincipalMode::residual);
    py::class_<DispersionMode>(m, "DispersionMode")
        .def_readonly("lambda_", &DispersionMode::lambda)
        .def_readonly("speed", &DispersionMode::speed)
        .def_readonly("mu0", &DispersionMode::mu0)
        .def_readonly("theta_grid", &DispersionMode::theta_grid)
        .def_readonly("q", &DispersionMode::q)
        .def_readonly("mean_theta_edge", &DispersionMode::mean_theta_edge)
        .def_readonly("fisher_term", &DispersionMode::fisher_term);
    py::class_<MinimalSpeedResult>(m, "MinimalSpeedResult")
        .def_readonly("c_star", &MinimalSpeedResult::c_star)
        .def_readonly("lambda_star", &MinimalSpeedResult::lambda_star)
        .def_readonly("mode_star", &MinimalSpeedResult::mode_star)
        .def_readonly("bracket_low", &MinimalSpeedResult::bracket_low)
        .def_readonly("bracket_high", &MinimalSpeedResult::bracket_high)
        .def_readonly("derivative", &MinimalSpeedResult::derivative);
    py::class_<EdgeDiagnostics>(m, "EdgeDiagnostics")
        .def_readonly("mean_theta_edge", &EdgeDiagnostics::mean_theta_edge)
        .def_readonly("fisher_term", &EdgeDiagnostics::fisher_term)
        .def_readonly("integrated_identity_residual", &EdgeDiagnostics::integrated_identity_residual)
        .def_readonly("mean_theta_identity_residual", &EdgeDiagnostics::mean_theta_identity_residual)
        .def_readonly("cstar_residual", &EdgeDiagnostics::cstar_residual)
        .def_readonly("cstar_squared_formula", &EdgeDiagnostics::cstar_squared_formula)
        .def_readonly("cstar_squared_residual", &EdgeDiagnostics::cstar_squared_residual)
        .def_readonly("kpp_speed_squared", &EdgeDiagnostics::kpp_speed_squared)
        .def_readonly("kpp_underestimates", &EdgeDiagnostics::kpp_underestimates);

    m.def(
        "principal_mode",
        [](const ModelParams& p, double lambda, std::size_t n) {
            return principal_mode(p, lambda, Grid1D(0.0, p.theta_max, n));
        },
        py::arg("params"), py::arg("lambda_"), py::arg("theta_nodes") = default_theta_nodes);
    m.def(
        "dispersion_mode",
        [](const ModelParams& p, double lambda, std::size_t n) {
            return dispersion_mode(p, lambda, Grid1D(0.0, p.theta_max, n));
        },
        py::arg("params"), py::arg("lambda_"), py::arg("theta_nodes") = default_theta_nodes);
    m.def("wave_speed", &wave_speed, py::arg("params"), py::arg("lambda_"),
          py::arg("theta_nodes") = default_theta_nodes);
    m.def(
        "speed_scan",
        [](const ModelParams& p, const std::vector<double>& lambdas, std::size_t n) {
            return speed_scan(p, lambdas, n);
        },
        py::arg("params"), py::arg("lambdas"), py::arg("theta_nodes") = default_theta_nodes);
    m.def(
        "minimal_speed",
        [](const ModelParams& p, std::size_t n) {
            MinimalSpeedOptions o;
            o.theta_nodes = n;
            return minimal_speed(p, o);
        },
        py::arg("params"), py::arg("theta_nodes") = default_theta_nodes);
    m.def("edge_diagnostics", &edge_diagnostics, py::arg("mode"), py::arg("params"),
          py::arg("is_minimizer") = false);

    // frontsim
    py::class_<TraitField>(m, "TraitField")
        .def_readonly("grid_x", &TraitField::grid_x)
        .def_readonly("grid_theta", &TraitField::grid_theta)
        .def_readwrite("n", &TraitField::n)
        .def_readonly("time", &TraitField::time)
        .def("marginal", &TraitField::marginal)
        .def("total_mass", &TraitField::total_mass);
    m.def(
        "step_field",
        [](const Grid1D& gx, const Grid1D& gt, double level, double width) {
            return smoothed_step_field(gx, gt, [level](double) { return level; }, width);
        },
        py::arg("grid_x"), py::arg("grid_theta"), py::arg("level"), py::arg("width"));
    m.def(
        "step", [](const TraitField& f, const ModelParams& p, double dt) { return step(f, p, dt); },
        py::arg("field"), py::arg("params"), py::arg("dt"));
    py::class_<FrontTrack>(m, "FrontTrack")
        .def(py::init([](std::vector<double> t, std::vector<double> x, double thr) {
                 return FrontTrack{std::move(t), std::move(x), thr};
             }),
             py::arg("times"), py::arg("positions"), py::arg("threshold") = 0.5)
        .def_readonly("times", &FrontTrack::times)
        .def_readonly("positions", &FrontTrack::positions)
        .def_readonly("threshold", &FrontTrack::threshold);
    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("field", &SimulationResult::field)
        .def_readonly("track", &SimulationResult::track)
        .def_readonly("window_shifts", &SimulationResult::window_shifts)
        .def_readonly("min_density", &SimulationResult::min_density);
    m.def(
        "simulate",
        [](const ModelParams& p, TraitField init, double t_end, double dt, double threshold, double interval,
           bool moving_window) {
            TrackConfig tc;
            tc.threshold = threshold;
            tc.output_interval = interval;
            tc.moving_window = moving_window;
            return simulate(p, std::move(init), t_end, dt, tc);
        },
        py::arg("params"), py::arg("init"), py::arg("t_end"), py::arg("dt"), py::arg("threshold") = 0.5,
        py::arg("output_interval") = 0.5, py::arg("moving_window") = false);
    m.def(
        "front_position",
        [](const std::vector<double>& rho, const Grid1D& g, double thr) { return front_position(rho, g, thr); },
        py::arg("rho"), py::arg("grid_x"), py::arg("threshold"));
    py::class_<PowerLawFit>(m, "PowerLawFit")
        .def_readonly("exponent", &PowerLawFit::exponent)
        .def_readonly("prefactor", &PowerLawFit::prefactor)
        .def_readonly("r_squared", &PowerLawFit::r_squared);
    m.def(
        "fit_power_law", [](const FrontTrack& tr, double lo, double hi) { return fit_power_law(tr, lo, hi); },
        py::arg("track"), py::arg("t_lo"), py::arg("t_hi"));

    // phase
    py::class_<PhaseParams>(m, "PhaseParams")
        .def(py::init([](double r, double alpha) { return PhaseParams{r, alpha}; }), py::arg("r") = 1.0,
             py::arg("alpha") = 1.0)
        .def_readwrite("r", &PhaseParams::r)
        .def_readwrite("alpha", &PhaseParams::alpha);
    py::class_<PhaseSample>(m, "PhaseSample")
        .def_readonly("z", &PhaseSample::z)
        .def_readonly("u0_free", &PhaseSample::u0_free)
        .def_readonly("u0", &PhaseSample::u0)
        .def_readonly("du_dt", &PhaseSample::du_dt)
        .def_readonly("du_dx", &PhaseSample::du_dx)
        .def_readonly("du_dtheta", &PhaseSample::du_dtheta)
        .def_readonly("d2u_dthetatheta", &PhaseSample::d2u_dthetatheta);
    m.def("phase_free", &phase_free, py::arg("t"), py::arg("x"), py::arg("theta"), py::arg("params"));
    m.def("phase_value", &phase_value, py::arg("t"), py::arg("x"), py::arg("theta"), py::arg("params"));
    m.def("nullset_x", &nullset_x, py::arg("t"), py::arg("theta"), py::arg("params"));
    m.def(
        "edge_location",
        [](double t, const PhaseParams& p) {
            const EdgeLocation e = edge_location(t, p);
            return py::make_tuple(e.x_edge, e.theta_edge);
        },
        py::arg("t"), py::arg("params"));
    m.def(
        "characteristic_endpoint",
        [](double px, double pth, double t_end, const PhaseParams& p, double dt) {
            const CharacteristicState s = integrate_characteristics(px, pth, t_end, p, dt).end();
            return py::dict(py::arg("x") = s.x, py::arg("theta") = s.theta, py::arg("p_x") = s.p_x,
                            py::arg("p_theta") = s.p_theta, py::arg("phase") = s.phase);
        },
        py::arg("p_x0"), py::arg("p_theta0"), py::arg("t_end"), py::arg("params"), py::arg("dt"));
    py::class_<SpeedTable>(m, "SpeedTable")
        .def(py::init<std::vector<double>, std::vector<double>, double, double>(), py::arg("lambdas"),
             py::arg("speeds"), py::arg("envelope_r"), py::arg("envelope_theta_max"))
        .def_static(
            "from_dispersion",
            [](const ModelParams& p, const std::vector<double>& ls) { return SpeedTable::from_dispersion(p, ls); },
            py::arg("params"), py::arg("lambdas"))
        .def_static("lambda_grid", &SpeedTable::lambda_grid)
        .def("speed", &SpeedTable::speed)
        .def("hamiltonian", &SpeedTable::hamiltonian)
        .def("minimum", &SpeedTable::minimum);
    m.def(
        "eikonal_propagate",
        [](const SpeedTable& table, const Grid1D& g, std::vector<double> u, double t_end, double dt) {
            const EikonalResult r = eikonal_propagate(table, g, std::move(u), t_end, dt);
            return py::make_tuple(r.u, r.times, r.fronts);
        },
        py::arg("table"), py::arg("grid_x"), py::arg("u_init"), py::arg("t_end"), py::arg("dt"));
    m.def("hj_residual_at", &hj_residual_at, py::arg("t"), py::arg("x"), py::arg("theta"), py::arg("params"),
          py::arg("h"));

    // canonical
    py::class_<SelectedTraitField>(m, "SelectedTraitField")
        .def(py::init([](const Grid1D& g, std::vector<double> th, double t) {
                 return SelectedTraitField{g, std::move(th), t};
             }),
             py::arg("grid_x"), py::arg("theta_bar"), py::arg("time"))
        .def_readonly("grid_x", &SelectedTraitField::grid_x)
        .def_readonly("theta_bar", &SelectedTraitField::theta_bar)
        .def_readonly("time", &SelectedTraitField::time);
    m.def(
        "selected_trait", [](const std::vector<double>& u, const Grid1D& g) { return selected_trait(u, g); },
        py::arg("u_slice"), py::arg("grid_theta"));
    m.def("extract_selected_trait", &extract_selected_trait, py::arg("t"), py::arg("grid_x"), py::arg("grid_theta"),
          py::arg("params"));
    m.def("explicit_selected_trait", &explicit_selected_trait, py::arg("x"), py::arg("params"));
    m.def(
        "burgers_solve",
        [](const SelectedTraitField& init, const PhaseParams& p, double t_end, double dt) {
            return burgers_solve(init, explicit_phase_oracle(p), t_end, dt).field;
        },
        py::arg("init"), py::arg("params"), py::arg("t_end"), py::arg("dt"),
        "Upwind canonical equation driven by the explicit phase.");
    m.def(
        "burgers_solve_uniform",
        [](const SelectedTraitField& init, double g, double mm, double t_end, double dt) {
            return burgers_solve(init, uniform_phase_oracle(g, mm), t_end, dt).field;
        },
        py::arg("init"), py::arg("g"), py::arg("m"), py::arg("t_end"), py::arg("dt"));
    m.def(
        "canonical_residual",
        [](const SelectedTraitField& a, const SelectedTraitField& b, const PhaseParams& p) {
            return canonical_residual(a, b, explicit_phase_oracle(p)).max_abs;
        },
        py::arg("earlier"), py::arg("later"), py::arg("params"));
}
