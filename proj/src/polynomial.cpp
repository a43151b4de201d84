#include "optomech/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "optomech/errors.hpp"

namespace optomech {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
    trim();
}

void Polynomial::trim() {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::from_roots(const std::vector<cplx>& roots, double lead) {
    std::vector<cplx> c{cplx(lead)};
    for (const cplx& r : roots) {
        std::vector<cplx> next(c.size() + 1, cplx(0.0));
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    double scale = 0.0;
    for (const cplx& v : c) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (std::abs(c[k].imag()) > 1e-8 * scale)
            throw NumericalError("Polynomial::from_roots: roots are not closed under conjugation");
        out[k] = c[k].real();
    }
    return Polynomial(std::move(out));
}

double Polynomial::operator()(double s) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

cplx Polynomial::operator()(cplx s) const {
    cplx acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() < 2) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
}

Polynomial Polynomial::reflected() const {
    std::vector<double> r = c_;
    for (std::size_t k = 1; k < r.size(); k += 2) r[k] = -r[k];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::even_part_in_square() const {
    std::vector<double> q;
    double scale = 0.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < c_.size(); ++k) {
        if (k % 2 == 0)
            q.push_back(c_[k]);
        else if (std::abs(c_[k]) > 1e-12 * scale)
            throw NumericalError("Polynomial::even_part_in_square: polynomial is not even");
    }
    return Polynomial(std::move(q));
}

Polynomial Polynomial::substitute_square() const {
    std::vector<double> r(2 * c_.size() - 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) r[2 * k] = c_[k];
    return Polynomial(std::move(r));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return Polynomial(std::move(r));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
}

Polynomial operator*(double k, const Polynomial& a) {
    std::vector<double> r = a.c_;
    for (double& v : r) v *= k;
    return Polynomial(std::move(r));
}

namespace {

double backward_error(const Polynomial& p, cplx r) {
    double den = 0.0, mag = 1.0;
    const double ar = std::abs(r);
    for (double c : p.coeffs()) {
        den += std::abs(c) * mag;
        mag *= ar;
    }
    return den > 0.0 ? std::abs(p(r)) / den : 0.0;
}

}  // namespace

RootReport find_roots(const Polynomial& p, double tolerance) {
    RootReport rep;
    const int n = p.degree();
    if (n < 1) return rep;

    // Leading zeros at the origin are split off exactly.
    const auto& c = p.coeffs();
    std::size_t zeros = 0;
    while (zeros < c.size() && c[zeros] == 0.0) ++zeros;
    for (std::size_t k = 0; k < zeros; ++k) rep.roots.emplace_back(0.0);
    const int m = n - static_cast<int>(zeros);
    if (m == 0) return rep;

    // Rescale s = sigma v so that the constant and leading coefficients match in size.
    const double sigma = std::pow(std::abs(c[zeros] / c.back()), 1.0 / m);
    std::vector<double> a(m + 1);
    double pw = 1.0;
    for (int k = 0; k <= m; ++k) {
        a[k] = c[zeros + k] * pw;
        pw *= sigma;
    }
    double amax = 0.0, amin = std::numeric_limits<double>::infinity();
    for (double v : a) {
        amax = std::max(amax, std::abs(v));
        if (v != 0.0) amin = std::min(amin, std::abs(v));
    }
    rep.coefficient_span = std::log10(amax / amin);

    // Closed forms for low degree keep tiny real parts (lightly damped poles) exact.
    if (m <= 2) {
        const double a0 = c[zeros], a1 = c[zeros + 1];
        if (m == 1) {
            rep.roots.emplace_back(-a0 / a1);
        } else {
            const double a2 = c[zeros + 2];
            const double disc = a1 * a1 - 4.0 * a2 * a0;
            if (disc >= 0.0) {
                const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
                rep.roots.emplace_back(q / a2);
                rep.roots.emplace_back(q != 0.0 ? a0 / q : 0.0);
            } else {
                const double re = -a1 / (2.0 * a2), im = std::sqrt(-disc) / (2.0 * std::abs(a2));
                rep.roots.emplace_back(re, -im);
                rep.roots.emplace_back(re, im);
            }
        }
        for (const cplx& r : rep.roots) rep.max_residual = std::max(rep.max_residual, backward_error(p, r));
        std::sort(rep.roots.begin(), rep.roots.end(), [](cplx x, cplx y) {
            return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
        });
        return rep;
    }

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) comp(i, m - 1) = -a[i] / a[m];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success)
        throw NumericalError("find_roots: companion eigenvalue iteration failed (coefficient span 1e" +
                             std::to_string(rep.coefficient_span) + ")");

    const Polynomial dp = p.derivative();
    for (int i = 0; i < m; ++i) {
        cplx r = es.eigenvalues()[i] * sigma;
        for (int it = 0; it < 8; ++it) {
            const cplx d = dp(r);
            if (d == cplx(0.0)) break;
            const cplx step = p(r) / d;
            const cplx cand = r - step;
            if (!(backward_error(p, cand) < backward_error(p, r))) break;
            r = cand;
        }
        // Snap numerically real roots onto the axis so conjugate pairing stays exact.
        if (std::abs(r.imag()) <= 1e-14 * std::abs(r)) r = cplx(r.real(), 0.0);
        rep.max_residual = std::max(rep.max_residual, backward_error(p, r));
        rep.roots.push_back(r);
    }
    if (!(rep.max_residual <= tolerance))
        throw NumericalError("find_roots: backward error " + std::to_string(rep.max_residual) +
                             " exceeds tolerance (degree " + std::to_string(n) +
                             ", coefficient span 1e" + std::to_string(rep.coefficient_span) + ")");
    std::sort(rep.roots.begin(), rep.roots.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return rep;
}

}  // namespace optomech
