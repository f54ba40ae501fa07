#pragma once

#include "sortwave/dispersion.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sortwave::cli {

enum class Subcommand { dispersion, simulate, accelerate, phase, canonical };

/// Bad flags, bad values or bad config files. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero in the "auto" fields means: derive from the parameters in run().
struct RunConfig {
    Subcommand subcommand = Subcommand::dispersion;
    ModelParams params;
    bool theta_max_given = false;
    std::string out_dir = ".";
    int precision = 17;

    // dispersion
    std::size_t theta_nodes = default_theta_nodes;
    std::size_t lambda_count = 200;
    double lambda_min = 0.0;  // auto: -8 sqrt(r/theta_max)
    double lambda_max = 0.0;  // auto: -sqrt(r/theta_max)/8

    // simulate / accelerate
    double dx = 0.0;
    double dtheta = 0.0;
    std::size_t trait_nodes = 11;
    double dt = 0.0;
    double x_length = 0.0;
    double t_end = 0.0;
    double threshold = 0.0;
    double output_interval = 0.0;
    double trait_support = 1.0;  // accelerate: initial traits in [0, trait_support]
    double fit_from = 2.0;
    double fit_to = 0.0;
    bool eikonal = false;
    bool snapshot = false;

    // phase
    std::vector<double> times = {1.0, 2.0, 3.0};
    std::size_t theta_samples = 201;

    // canonical
    double t0 = 1.0;
    double t1 = 2.0;
    double x_lo = 2.0;
    double x_hi = 3.0;
    std::size_t nx = 101;
};

const char* subcommand_name(Subcommand s) noexcept;

/// `args` excludes the program name; args[0] is the subcommand. A
/// `--config FILE` flag reads "key = value" lines first; explicit flags win.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs the pipeline and writes its files into out_dir. Returns 0, or 1 after
/// printing the structured error name of a solver failure to `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// Full entry point: parse, run, exit code 0/1/2.
int main_entry(int argc, char** argv);

}  // namespace sortwave::cli
