#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sortwave {

/// Uniform node-centered grid on [lo, hi], endpoints included.
class Grid1D {
public:
    Grid1D(double lo, double hi, std::size_t n);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    double node(std::size_t j) const noexcept { return lo_ + static_cast<double>(j) * h_; }
    std::vector<double> nodes() const;

    /// Same node count and spacing, moved by `offset`.
    Grid1D shifted(double offset) const { return Grid1D(lo_ + offset, hi_ + offset, n_); }

private:
    double lo_;
    double hi_;
    std::size_t n_;
    double h_;
};

/// Tridiagonal matrix with optional right-hand side. Row i reads
/// sub[i-1]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1].
struct TridiagonalSystem {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;
    std::vector<double> rhs;

    std::size_t size() const noexcept { return diag.size(); }
    /// y = A x
    std::vector<double> multiply(std::span<const double> x) const;
};

/// Thomas algorithm. Throws Error(singular_system) on a vanishing pivot.
std::vector<double> tridiag_solve(const TridiagonalSystem& sys);

/// In-place variant used by the time steppers: solves A x = b with the
/// coefficients given as spans, overwriting `b` by x. `scratch` must hold
/// size()-1 entries.
void tridiag_solve_inplace(std::span<const double> sub, std::span<const double> diag,
                           std::span<const double> sup, std::span<double> b,
                           std::span<double> scratch);

/// Composite trapezoid rule with uniform spacing h.
double trapezoid(std::span<const double> values, double h);

/// Trapezoid weights (h/2 at the two ends, h inside).
std::vector<double> trapezoid_weights(std::size_t n, double h);

/// Real root of Z^3 + p Z + q = 0 for p >= 0 (unique in that regime).
double depressed_cubic_root(double p, double q);

}  // namespace sortwave
