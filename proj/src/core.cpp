#include "sortwave/core.hpp"

#include "sortwave/error.hpp"

#include <cmath>
#include <string>

namespace sortwave {

Grid1D::Grid1D(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi), n_(n), h_(0.0) {
    if (n < 3) {
        throw Error(ErrorKind::invalid_argument, "grid needs at least 3 nodes, got " + std::to_string(n));
    }
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error(ErrorKind::invalid_argument, "grid requires finite lo < hi");
    }
    h_ = (hi - lo) / static_cast<double>(n - 1);
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = node(j);
    return out;
}

std::vector<double> TridiagonalSystem::multiply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag[i] * x[i];
        if (i > 0) acc += sub[i - 1] * x[i - 1];
        if (i + 1 < n) acc += sup[i] * x[i + 1];
        y[i] = acc;
    }
    return y;
}

void tridiag_solve_inplace(std::span<const double> sub, std::span<const double> diag,
                           std::span<const double> sup, std::span<double> b,
                           std::span<double> scratch) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    double pivot = diag[0];
    if (pivot == 0.0) throw Error(ErrorKind::singular_system, "zero pivot at row 0");
    b[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i - 1] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i - 1] * scratch[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw Error(ErrorKind::singular_system, "zero pivot at row " + std::to_string(i));
        }
        b[i] = (b[i] - sub[i - 1] * b[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        b[i] -= scratch[i] * b[i + 1];
    }
}

std::vector<double> tridiag_solve(const TridiagonalSystem& sys) {
    const std::size_t n = sys.size();
    if (sys.rhs.size() != n || (n > 0 && (sys.sub.size() != n - 1 || sys.sup.size() != n - 1))) {
        throw Error(ErrorKind::invalid_argument, "inconsistent tridiagonal system lengths");
    }
    std::vector<double> x = sys.rhs;
    std::vector<double> scratch(n > 0 ? n - 1 : 0);
    tridiag_solve_inplace(sys.sub, sys.diag, sys.sup, x, scratch);
    return x;
}

double trapezoid(std::span<const double> values, double h) {
    if (values.empty()) throw Error(ErrorKind::invalid_argument, "trapezoid of empty vector");
    if (values.size() == 1) return 0.0;
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t j = 1; j + 1 < values.size(); ++j) acc += values[j];
    return acc * h;
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    if (n > 0) {
        w.front() = 0.5 * h;
        w.back() = 0.5 * h;
    }
    return w;
}

double depressed_cubic_root(double p, double q) {
    if (q == 0.0) return 0.0;
    double z;
    if (p == 0.0) {
        z = std::cbrt(-q);
    } else {
        // Trigonometric-hyperbolic form of Cardano's root; single real root for p > 0.
        const double scale = 2.0 * std::sqrt(p / 3.0);
        const double arg = 1.5 * q / p * std::sqrt(3.0 / p);
        z = -scale * std::sinh(std::asinh(arg) / 3.0);
    }
    // one Newton polish; f' = 3z^2 + p > 0 away from the triple root
    const double slope = 3.0 * z * z + p;
    if (slope > 0.0) z -= (z * z * z + p * z + q) / slope;
    return z;
}

}  // namespace sortwave
