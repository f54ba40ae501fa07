#pragma once

// Reference computations for the tests. Each one uses a different algorithm
// from the library code it checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> dense_solve(const Eigen::MatrixXd& a, const std::vector<double>& b) {
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    return {x.data(), x.data() + x.size()};
}

/// Symmetric tridiagonal matrix (diag, off) of the trait operator
/// alpha*D2 + theta*lambda^2 + r on n nodes of [0, theta_max], written in the
/// trapezoid-weighted symmetric form directly (end couplings sqrt(2)*alpha/h^2).
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;
};

inline SymTridiag trait_matrix(double r, double alpha, double theta_max, double lambda, std::size_t n) {
    const double h = theta_max / static_cast<double>(n - 1);
    const double k = alpha / (h * h);
    SymTridiag m;
    m.diag.resize(n);
    m.off.assign(n - 1, k);
    for (std::size_t j = 0; j < n; ++j) {
        m.diag[j] = -2.0 * k + (static_cast<double>(j) * h) * lambda * lambda + r;
    }
    m.off.front() = std::sqrt(2.0) * k;
    m.off.back() = std::sqrt(2.0) * k;
    return m;
}

/// Number of eigenvalues below x (Sturm sequence).
inline std::size_t sturm_count(const SymTridiag& m, double x) {
    std::size_t count = 0;
    double q = m.diag[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < m.diag.size(); ++i) {
        const double prev = q == 0.0 ? 1e-300 : q;
        q = m.diag[i] - x - m.off[i - 1] * m.off[i - 1] / prev;
        if (q < 0.0) ++count;
    }
    return count;
}

/// Largest eigenvalue by bisection on the Sturm count, from Gershgorin bounds.
inline double largest_eigenvalue(const SymTridiag& m) {
    double lo = m.diag[0];
    double hi = m.diag[0];
    for (std::size_t i = 0; i < m.diag.size(); ++i) {
        const double left = i > 0 ? std::abs(m.off[i - 1]) : 0.0;
        const double right = i + 1 < m.diag.size() ? std::abs(m.off[i]) : 0.0;
        lo = std::min(lo, m.diag[i] - left - right);
        hi = std::max(hi, m.diag[i] + left + right);
    }
    const std::size_t n = m.diag.size();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(m, mid) == n) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double mu0(double r, double alpha, double theta_max, double lambda, std::size_t n) {
    return largest_eigenvalue(trait_matrix(r, alpha, theta_max, lambda, n));
}

/// Golden-section minimum of f on [a, b]; returns (argmin, min).
inline std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b,
                                            double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Root of f on [a, b] with a sign change, by bisection.
inline double bisect(const std::function<double(double)>& f, double a, double b, int iterations = 200) {
    double fa = f(a);
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = f(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

/// log2 of the error ratio for a refinement by `factor`.
inline double observed_order(double coarse_error, double fine_error, double factor = 2.0) {
    return std::log(coarse_error / fine_error) / std::log(factor);
}

}  // namespace oracle
