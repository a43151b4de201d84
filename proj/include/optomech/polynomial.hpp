#pragma once

#include <complex>
#include <vector>

namespace optomech {

using cplx = std::complex<double>;

/// Real polynomial, coefficients in ascending powers: c[0] + c[1] s + ...
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);
    static Polynomial constant(double c) { return Polynomial({c}); }
    /// Monic-free product lead * prod (s - r_k); complex roots must come in conjugate pairs.
    static Polynomial from_roots(const std::vector<cplx>& roots, double lead = 1.0);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<double>& coeffs() const { return c_; }
    double leading() const { return c_.back(); }
    double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }

    double operator()(double s) const;
    cplx operator()(cplx s) const;

    Polynomial derivative() const;
    /// p(-s).
    Polynomial reflected() const;
    /// q(u) with p(s) = q(s^2); requires p even.
    Polynomial even_part_in_square() const;
    /// p(s^2) as a polynomial in s.
    Polynomial substitute_square() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double k, const Polynomial& a);

private:
    void trim();
    std::vector<double> c_{0.0};
};

struct RootReport {
    std::vector<cplx> roots;
    double max_residual = 0.0;   // max |p(r)| / (sum |c_k| |r|^k)
    double coefficient_span = 0.0;  // log10(max|c| / min nonzero |c|) after scaling
};

/// All complex roots via companion-matrix eigenvalues on a rescaled variable,
/// followed by Newton polishing on the original polynomial. Throws NumericalError
/// if the backward error stays above tolerance.
RootReport find_roots(const Polynomial& p, double tolerance = 1e-10);

}  // namespace optomech
