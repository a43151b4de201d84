#include "optomech/wigner_grid.hpp"

#include <cmath>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

Axis Axis::centered(double center, double half_width, std::size_t n) {
    if (n < 2) throw ConfigError("Axis needs at least two points");
    return Axis{center - half_width, 2.0 * half_width / static_cast<double>(n - 1), n};
}

double WignerGrid::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell_area();
}

NegativityMetrics negativity_metrics(const WignerGrid& w) {
    NegativityMetrics m;
    m.min_value = w.values.empty() ? 0.0 : w.values.front();
    double neg = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < w.x_axis.n; ++i) {
        for (std::size_t j = 0; j < w.p_axis.n; ++j) {
            const double v = w.at(i, j);
            if (v < m.min_value || (i == 0 && j == 0)) {
                m.min_value = v;
                m.min_x = w.x_axis[i];
                m.min_p = w.p_axis[j];
            }
            if (v < 0.0) neg -= v;
            sq += v * v;
        }
    }
    m.negative_volume = neg * w.cell_area();
    m.purity = ledger::purity_factor * sq * w.cell_area();
    return m;
}

bool check_wigner_invariants(const WignerGrid& w, double tol) {
    if (w.values.size() != w.x_axis.n * w.p_axis.n)
        throw InvariantViolation("WignerGrid: value count does not match axes");
    double lo = 0.0;
    for (double v : w.values) {
        if (!std::isfinite(v)) throw InvariantViolation("WignerGrid: non-finite value");
        lo = std::min(lo, v);
    }
    const double norm = w.integral();
    if (std::abs(norm - 1.0) > tol)
        throw InvariantViolation("WignerGrid: integral " + std::to_string(norm) + " differs from 1");
    return lo >= ledger::wigner_floor - 1e-6;
}

double l1_distance(const WignerGrid& a, const WignerGrid& b) {
    if (a.values.size() != b.values.size())
        throw ConfigError("l1_distance: grids differ in shape");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) s += std::abs(a.values[k] - b.values[k]);
    return s * a.cell_area();
}

}  // namespace optomech
