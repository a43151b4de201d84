#pragma once

#include <cstddef>
#include <vector>

namespace optomech {

/// Uniform axis: start + i * step, i = 0..n-1.
struct Axis {
    double start = 0.0;
    double step = 1.0;
    std::size_t n = 0;

    static Axis centered(double center, double half_width, std::size_t n);
    double operator[](std::size_t i) const { return start + step * static_cast<double>(i); }
    double back() const { return (*this)[n - 1]; }
};

/// W(X, P) sampled on a rectangular grid in ledger units; values are row-major in X.
struct WignerGrid {
    Axis x_axis;
    Axis p_axis;
    std::vector<double> values;

    double cell_area() const { return x_axis.step * p_axis.step; }
    double& at(std::size_t i, std::size_t j) { return values[i * p_axis.n + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * p_axis.n + j]; }
    double integral() const;
};

struct NegativityMetrics {
    double min_value = 0.0;
    double min_x = 0.0;
    double min_p = 0.0;
    double negative_volume = 0.0;
    double purity = 0.0;
};

NegativityMetrics negativity_metrics(const WignerGrid& w);

/// Throws InvariantViolation when |integral - 1| > tol or a value is non-finite.
/// Returns true if the grid respects the Wigner lower bound (soft check).
bool check_wigner_invariants(const WignerGrid& w, double tol = 1e-6);

/// Sum |a - b| dX dP over a common grid.
double l1_distance(const WignerGrid& a, const WignerGrid& b);

}  // namespace optomech
