#include "optomech/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "optomech/errors.hpp"

namespace optomech {

namespace {

// (sI - A)^{-1} = adj / D with A = [[0, w], [-w, -g]]; numerators of state and output responses.
struct TransferPolys {
    Polynomial D;
    std::array<std::array<Polynomial, 4>, 2> G;  // state i, input j
    std::array<Polynomial, 4> Y;
    Eigen::Vector4d weights;
};

TransferPolys transfer_polys(const PlantModel& plant) {
    const StateSpace ss = state_space(plant);
    const double w = plant.omega_m, g = plant.gamma_m;
    TransferPolys t;
    t.D = Polynomial({w * w, g, 1.0});
    const std::array<std::array<Polynomial, 2>, 2> adj{{{Polynomial({g, 1.0}), Polynomial({w})},
                                                        {Polynomial({-w}), Polynomial({0.0, 1.0})}}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j)
            t.G[i][j] = ss.B(0, j) * adj[i][0] + ss.B(1, j) * adj[i][1];
    for (int j = 0; j < 4; ++j)
        t.Y[j] = ss.H(0) * t.G[0][j] + ss.H(1) * t.G[1][j] + ss.delta(j) * t.D;
    t.weights = ss.weights;
    return t;
}

// Even polynomial in s -> polynomial in w = Omega^2 (s^2 = -w).
Polynomial even_s_to_omega_sq(const Polynomial& p) {
    std::vector<double> q = p.even_part_in_square().coeffs();
    for (std::size_t k = 1; k < q.size(); k += 2) q[k] = -q[k];
    return Polynomial(std::move(q));
}

// Polynomial in w = Omega^2 -> polynomial in u = s^2.
Polynomial omega_sq_to_s_sq(const Polynomial& p) {
    std::vector<double> q = p.coeffs();
    for (std::size_t k = 1; k < q.size(); k += 2) q[k] = -q[k];
    return Polynomial(std::move(q));
}

cplx product_form(double lead, const std::vector<cplx>& roots, cplx s) {
    cplx acc = lead;
    for (const cplx& r : roots) acc *= (s - r);
    return acc;
}

// Left-half-plane spectral factor of an even polynomial given in w = Omega^2.
void factor_even(const Polynomial& p_w, double gain, const char* what, double& lead,
                 std::vector<cplx>& roots) {
    const double top = gain * p_w.leading();
    if (!(top > 0.0) || !(gain * p_w[0] >= 0.0))
        throw NumericalError(std::string("spectral_factorize: ") + what + " is not positive on the real axis");
    lead = std::sqrt(top);
    roots.clear();
    if (p_w.degree() == 0) return;
    const RootReport rep = find_roots(omega_sq_to_s_sq(p_w), 1e-9);
    for (const cplx& u : rep.roots) {
        const cplx s = -std::sqrt(u);
        if (!(s.real() < -1e-9 * std::max(std::abs(s), 1e-300)))
            throw NumericalError(std::string("spectral_factorize: ") + what +
                                 " has a zero on the real frequency axis near Omega = " +
                                 std::to_string(std::abs(s.imag())) + " (coefficient span 1e" +
                                 std::to_string(rep.coefficient_span) + ")");
        roots.push_back(s);
    }
}

std::vector<double> check_frequencies(const CausalFactor& f) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::vector<double> extra{0.0};
    for (const auto* set : {&f.zeros, &f.poles}) {
        for (const cplx& r : *set) {
            const double a = std::abs(r);
            if (a > 0.0) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
            extra.push_back(std::abs(r.imag()));
            extra.push_back(std::abs(r.imag()) + r.real());
        }
    }
    if (!(hi > 0.0)) {
        lo = 1.0;
        hi = 1.0;
    }
    std::vector<double> om = extra;
    const int n = 400;
    const double a = std::log(lo * 1e-2), b = std::log(hi * 1e2);
    for (int k = 0; k < n; ++k) om.push_back(std::exp(a + (b - a) * k / (n - 1)));
    return om;
}

}  // namespace

// ---------------------------------------------------------------- PlantModel

void PlantModel::validate() const {
    if (!std::isfinite(omega_m) || !(omega_m > 0.0)) throw ConfigError("PlantModel.omega_m must be > 0");
    if (!std::isfinite(gamma_m) || !(gamma_m > 0.0))
        throw ConfigError("PlantModel.gamma_m must be > 0 (an undamped plant has no stationary state)");
    if (std::abs(gamma_m - 2.0 * omega_m) <= 1e-9 * omega_m)
        throw ConfigError("PlantModel: critically damped plant (degenerate mechanical poles) is not supported");
    if (!std::isfinite(Lambda) || Lambda < 0.0) throw ConfigError("PlantModel.Lambda must be >= 0");
    if (!std::isfinite(theta)) throw ConfigError("PlantModel.theta must be finite");
    if (!std::isfinite(n_th) || n_th < 0.0) throw ConfigError("PlantModel.n_th must be >= 0");
}

double PlantModel::coupling() const { return std::numbers::sqrt2 * Lambda; }

double PlantModel::bath_diffusion_x() const {
    const double m = 2.0 * n_th + 1.0;
    return gamma_m / (m + std::sqrt(m * m - 1.0));
}

double PlantModel::bath_diffusion_p() const {
    const double m = 2.0 * n_th + 1.0;
    const double eps = 1.0 / (m + std::sqrt(m * m - 1.0));
    return gamma_m * (2.0 * m - eps);
}

PlantModel plant_from_scales(const DerivedScales& s, double theta) {
    PlantModel p;
    p.omega_m = s.omega_m;
    p.gamma_m = s.gamma_m;
    p.Lambda = s.Lambda;
    p.theta = theta;
    p.n_th = s.n_th;
    p.validate();
    return p;
}

StateSpace state_space(const PlantModel& plant) {
    plant.validate();
    const double c = plant.coupling();
    StateSpace ss;
    ss.A << 0.0, plant.omega_m, -plant.omega_m, -plant.gamma_m;
    ss.B << 0.0, 0.0, 1.0, 0.0,  //
        c, 0.0, 0.0, 1.0;
    ss.H << std::sin(plant.theta) * c, 0.0;
    ss.delta << std::cos(plant.theta), std::sin(plant.theta), 0.0, 0.0;
    ss.weights << 1.0, 1.0, plant.bath_diffusion_x(), plant.bath_diffusion_p();
    return ss;
}

Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& A, const Eigen::Matrix2d& Q) {
    // Unknowns (V00, V01, V11).
    Eigen::Matrix3d M;
    M << 2.0 * A(0, 0), 2.0 * A(0, 1), 0.0,  //
        A(1, 0), A(0, 0) + A(1, 1), A(0, 1),   //
        0.0, 2.0 * A(1, 0), 2.0 * A(1, 1);
    const Eigen::Vector3d rhs(-Q(0, 0), -0.5 * (Q(0, 1) + Q(1, 0)), -Q(1, 1));
    const Eigen::Vector3d v = M.fullPivLu().solve(rhs);
    Eigen::Matrix2d V;
    V << v(0), v(1), v(1), v(2);
    if (!V.allFinite()) throw NumericalError("solve_lyapunov: singular system (is A stable?)");
    return V;
}

// ---------------------------------------------------------------- spectra

RationalSpectrum RationalSpectrum::from_even(Polynomial num_in_w, Polynomial den_in_w, double gain) {
    RationalSpectrum s;
    s.numerator = std::move(num_in_w);
    s.denominator = std::move(den_in_w);
    s.gain = gain;
    return s;
}

RationalSpectrum RationalSpectrum::from_terms(std::vector<SpectralTerm> num, Polynomial hurwitz_den) {
    RationalSpectrum s;
    Polynomial n;
    for (const SpectralTerm& t : num) n = n + t.weight * (t.p * t.p.reflected());
    s.numerator = even_s_to_omega_sq(n);
    s.denominator = even_s_to_omega_sq(hurwitz_den * hurwitz_den.reflected());
    s.numerator_terms = std::move(num);
    s.denominator_root = std::move(hurwitz_den);
    return s;
}

double RationalSpectrum::operator()(double Omega) const {
    const cplx s(0.0, -Omega);
    double num = 0.0;
    if (!numerator_terms.empty()) {
        for (const SpectralTerm& t : numerator_terms) num += t.weight * std::norm(t.p(s));
    } else {
        num = numerator(Omega * Omega);
    }
    const double den = denominator_root ? std::norm((*denominator_root)(s)) : denominator(Omega * Omega);
    return gain * num / den;
}

Polynomial CausalFactor::numerator() const { return Polynomial::from_roots(zeros, num_lead); }
Polynomial CausalFactor::denominator() const { return Polynomial::from_roots(poles, den_lead); }

cplx CausalFactor::at_s(cplx s) const {
    return product_form(num_lead, zeros, s) / product_form(den_lead, poles, s);
}

RationalSpectrum CausalFactor::spectrum() const {
    return RationalSpectrum::from_terms({SpectralTerm{1.0, numerator()}}, denominator());
}

RationalSpectrum output_spectrum(const PlantModel& plant) {
    plant.validate();
    // Without readout the record is the vacuum itself; keeping |D|^2/|D|^2 would leave
    // near-real-axis zeros for high-Q plants.
    if (plant.coupling() == 0.0) return RationalSpectrum::from_even(Polynomial({1.0}), Polynomial({1.0}));
    const TransferPolys t = transfer_polys(plant);
    std::vector<SpectralTerm> terms;
    for (int j = 0; j < 4; ++j) {
        const bool null = t.Y[j].degree() == 0 && t.Y[j][0] == 0.0;
        if (t.weights(j) > 0.0 && !null) terms.push_back({t.weights(j), t.Y[j]});
    }
    return RationalSpectrum::from_terms(std::move(terms), t.D);
}

CausalFactor spectral_factorize(const RationalSpectrum& S) {
    CausalFactor f;
    factor_even(S.numerator, S.gain, "numerator", f.num_lead, f.zeros);
    if (S.denominator_root) {
        const Polynomial& b = *S.denominator_root;
        f.den_lead = std::abs(b.leading());
        f.poles = find_roots(b, 1e-9).roots;
        for (const cplx& p : f.poles)
            if (!(p.real() < 0.0))
                throw NumericalError("spectral_factorize: supplied denominator factor is not Hurwitz");
    } else {
        factor_even(S.denominator, 1.0, "denominator", f.den_lead, f.poles);
    }

    for (double om : check_frequencies(f)) {
        const double target = S(om);
        const double got = std::norm(f(om));
        if (!(std::abs(got - target) <= 1e-8 * std::abs(target)))
            throw NumericalError("spectral_factorize: |phi|^2 deviates from S by " +
                                 std::to_string(std::abs(got / target - 1.0)) + " at Omega = " +
                                 std::to_string(om));
    }
    return f;
}

// ---------------------------------------------------------------- filters

Eigen::Vector2d FilterSet::kernel(double tau) const {
    if (tau < 0.0) return Eigen::Vector2d::Zero();
    Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
    for (std::size_t k = 0; k < kernel_poles.size(); ++k) acc += kernel_residues[k] * std::exp(kernel_poles[k] * tau);
    return acc.real();
}

Eigen::Vector2cd FilterSet::kernel_transform(cplx s) const {
    Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
    for (std::size_t k = 0; k < kernel_poles.size(); ++k) acc += kernel_residues[k] / (s - kernel_poles[k]);
    return acc;
}

double FilterSet::whitening_direct() const {
    if (whitening.poles.size() < whitening.zeros.size()) return 0.0;
    return whitening.den_lead / whitening.num_lead;
}

double FilterSet::whitening_smooth(double t) const {
    if (t < 0.0) return 0.0;
    cplx acc = 0.0;
    const auto& z = whitening.zeros;
    for (std::size_t k = 0; k < z.size(); ++k) {
        cplx dn = whitening.num_lead;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (j != k) dn *= (z[k] - z[j]);
        acc += product_form(whitening.den_lead, whitening.poles, z[k]) / dn * std::exp(z[k] * t);
    }
    return acc.real();
}

Eigen::Matrix2d FilterSet::projection_covariance() const {
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (std::size_t a = 0; a < kernel_poles.size(); ++a)
        for (std::size_t b = 0; b < kernel_poles.size(); ++b)
            acc -= kernel_residues[a] * kernel_residues[b].transpose() / (kernel_poles[a] + kernel_poles[b]);
    return Sigma_prior - acc.real();
}

FilterSet whitened_cross_kernels(const PlantModel& plant, const CausalFactor& factor) {
    const TransferPolys t = transfer_polys(plant);
    FilterSet fs;
    fs.whitening = factor;
    fs.model = state_space(plant);
    const StateSpace& ss = fs.model;

    const std::vector<cplx> mech = find_roots(t.D, 1e-12).roots;
    if (std::abs(mech[0] - mech[1]) <= 1e-9 * std::abs(mech[0]))
        throw NumericalError("whitened_cross_kernels: degenerate mechanical poles");
    const Polynomial dD = t.D.derivative();

    // Cov(x(0), z(-tau)) = sum over mechanical poles of the residue of
    // sum_j w_j G_j(s) W_j(-s) e^{s tau}, W_j = Y_j / (D phi) the innovation response.
    for (const cplx& p : mech) {
        Eigen::Vector2cd r = Eigen::Vector2cd::Zero();
        const cplx denom_minus = t.D(-p) * factor.at_s(-p);
        for (int j = 0; j < 4; ++j) {
            if (t.weights(j) == 0.0) continue;
            const cplx wz = t.Y[j](-p) / denom_minus;
            r(0) += t.weights(j) * t.G[0][j](p) * wz;
            r(1) += t.weights(j) * t.G[1][j](p) * wz;
        }
        fs.kernel_poles.push_back(p);
        fs.kernel_residues.push_back(r / dD(p));
    }
    const Eigen::Vector2d residue_gain = fs.kernel(0.0);
    fs.gain = residue_gain;

    // With a nonzero readout the gain is fixed exactly by the factor's zeros:
    // det(sI - A + G H) = s^2 + (gamma + G_x h) s + G_x h gamma + omega (omega + G_p h).
    // The residue sum loses digits for lightly damped plants, so it is kept as a cross-check.
    // For very weak readout the zeros sit on the mechanical poles and the subtraction
    // below cancels; the residue gain is used there instead.
    const double h = ss.H(0);
    if (factor.zeros.size() == 2 && h != 0.0) {
        const double n1 = -(factor.zeros[0] + factor.zeros[1]).real();
        const double n0 = (factor.zeros[0] * factor.zeros[1]).real();
        const double w = -ss.A(1, 0), g = -ss.A(1, 1);
        Eigen::Vector2d G;
        G(0) = (n1 - g) / h;
        G(1) = ((n0 - G(0) * h * g) / w - w) / h;
        const double kept = std::min(std::abs(n1 - g) / n1, std::abs(w * G(1) * h) / n0);
        if (kept < 1e-4) G = residue_gain;
        else if ((G - residue_gain).norm() > 1e-4 * G.norm())
            throw InvariantViolation("whitened_cross_kernels: residue gain disagrees with the factor zeros");
        // K(tau) = e^{A tau} G split over the eigenvalues of A.
        const Eigen::Matrix2cd Ac = ss.A.cast<cplx>();
        for (std::size_t i = 0; i < 2; ++i) {
            const cplx p = fs.kernel_poles[i], other = fs.kernel_poles[1 - i];
            fs.kernel_residues[i] = (Ac - other * Eigen::Matrix2cd::Identity()) * G.cast<cplx>() / (p - other);
        }
        fs.gain = G;
    }

    const Eigen::Matrix4d W = ss.weights.asDiagonal();
    fs.A_closed = ss.A - fs.gain * ss.H;
    fs.B_closed = ss.B - fs.gain * ss.delta;
    fs.V_c = solve_lyapunov(fs.A_closed, fs.B_closed * W * fs.B_closed.transpose());
    fs.Sigma_prior = solve_lyapunov(ss.A, ss.B * W * ss.B.transpose());

    // Innovations form consistency: closed-loop poles are the factor's zeros.
    if (factor.zeros.size() == 2) {
        Eigen::EigenSolver<Eigen::Matrix2d> es(fs.A_closed, false);
        std::array<cplx, 2> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
        const double scale = std::max(std::abs(factor.zeros[0]), std::abs(factor.zeros[1]));
        double worst = 0.0;
        for (const cplx& z : factor.zeros)
            worst = std::max(worst, std::min(std::abs(z - ev[0]), std::abs(z - ev[1])) / scale);
        if (worst > 1e-6)
            throw InvariantViolation("whitened_cross_kernels: closed-loop poles differ from the whitening zeros (" +
                                     std::to_string(worst) + ")");
    }

    // Residual decorrelation <R z(t)> = e^{A_c tau}(V_c H^T + B_c W delta^T) must vanish.
    const Eigen::Vector2d cross = fs.V_c * ss.H.transpose() + fs.B_closed * W * ss.delta.transpose();
    const double scale = fs.gain.norm() + (fs.V_c * ss.H.transpose()).norm() + (ss.B * W * ss.delta.transpose()).norm();
    fs.decorrelation_residual = scale > 0.0 ? cross.norm() / scale : cross.norm();
    if (!(fs.decorrelation_residual <= 1e-6))
        throw InvariantViolation("whitened_cross_kernels: residual correlates with the whitened record (" +
                                 std::to_string(fs.decorrelation_residual) + ")");

    const double det = fs.V_c.determinant();
    if (!(fs.V_c(0, 0) > 0.0) || !(det > 0.0) || std::abs(fs.V_c(0, 1) - fs.V_c(1, 0)) > 0.0)
        throw InvariantViolation("whitened_cross_kernels: V_c is not symmetric positive definite");
    if (!(det >= 1.0 - 1e-9))
        throw InvariantViolation("whitened_cross_kernels: det V_c = " + std::to_string(det) +
                                 " violates the uncertainty bound");
    const Eigen::Matrix2d gap = fs.Sigma_prior - fs.V_c;
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(gap).eigenvalues()(0);
    if (lo < -1e-9 * fs.Sigma_prior.norm())
        throw InvariantViolation("whitened_cross_kernels: V_c exceeds the prior covariance");
    return fs;
}

// ---------------------------------------------------------------- photon

void PhotonMode::validate() const {
    if (!std::isfinite(gamma_f) || !(gamma_f > 0.0)) throw ConfigError("PhotonMode.gamma_f must be > 0");
    if (!std::isfinite(omega_f)) throw ConfigError("PhotonMode.omega_f must be finite");
}

cplx PhotonMode::f(double t) const {
    if (t > 0.0) return 0.0;
    return std::sqrt(2.0 * gamma_f) * std::exp(rate() * t);
}

PhotonKernels photon_kernels(const PlantModel& plant, const FilterSet& filters, const PhotonMode& mode) {
    mode.validate();
    const StateSpace& ss = filters.model;
    if (!state_space(plant).A.isApprox(ss.A) || state_space(plant).H != ss.H)
        throw ConfigError("photon_kernels: filters were built for a different plant");
    const cplx q = mode.rate();
    const double amp = std::sqrt(2.0 * mode.gamma_f);
    // [Gamma, u_j(t)] = e_j f(t) with e = (1, i, 0, 0) in ledger units.
    const Eigen::Vector4cd e(1.0, cplx(0.0, 1.0), 0.0, 0.0);
    const Eigen::Matrix2cd qI = q * Eigen::Matrix2cd::Identity();

    const Eigen::Vector2cd E = (qI - filters.A_closed.cast<cplx>()).lu().solve(filters.B_closed.cast<cplx>() * e);
    PhotonKernels k;
    k.mode = mode;
    k.gamma_vec = amp * E;
    k.c_L = (ss.H.cast<cplx>() * E)(0) + (ss.delta.cast<cplx>() * e)(0);
    k.x0_commutator = amp * (qI - ss.A.cast<cplx>()).lu().solve(ss.B.cast<cplx>() * e);
    k.L_norm_sq = std::norm(k.c_L);

    // Same quantity through the Wiener split: [Gamma, x0] - int K(-t) L(t) dt.
    const Eigen::Vector2cd via_split = k.x0_commutator - k.c_L * amp * filters.kernel_transform(q);
    const double gscale = k.x0_commutator.norm() + std::abs(k.c_L) * amp * filters.kernel_transform(q).norm() + 1e-300;
    if ((via_split - k.gamma_vec).norm() > 1e-7 * gscale)
        throw InvariantViolation("photon_kernels: commutator routes for gamma disagree");

    const cplx a2 = k.c_L * amp;
    const cplx sq = a2 * a2 / (2.0 * q);
    const double mod = std::norm(a2) / (2.0 * mode.gamma_f);
    k.V_L << 0.5 * (sq.real() + mod), 0.5 * sq.imag(),  //
        0.5 * sq.imag(), 0.5 * (mod - sq.real());

    if (k.L_norm_sq > 1.0 + 1e-6)
        throw InvariantViolation("photon_kernels: ||L||^2 = " + std::to_string(k.L_norm_sq) +
                                 " exceeds 1 (commutator ledger violated)");
    return k;
}

KernelTable sample_kernels(const FilterSet& filters, const PhotonKernels& photon, double dt, std::size_t n) {
    if (!(dt > 0.0) || n < 2) throw ConfigError("sample_kernels: need dt > 0 and n >= 2");
    KernelTable tab;
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = -dt * static_cast<double>(n - 1 - k);
        const Eigen::Vector2d K = filters.kernel(-t);
        tab.t.push_back(t);
        tab.K_x.push_back(K(0));
        tab.K_p.push_back(K(1));
        tab.L.push_back(photon.L(t));
        peak = std::max(peak, K.norm());
    }
    tab.tail_ratio = peak > 0.0 ? std::hypot(tab.K_x.front(), tab.K_p.front()) / peak : 0.0;
    return tab;
}

KernelTable sample_kernels_auto(const PlantModel& plant, const FilterSet& filters, const PhotonKernels& photon,
                                std::size_t max_points) {
    double fast = std::max({plant.omega_m, photon.mode.gamma_f, std::abs(photon.mode.omega_f)});
    double slow = 1.0 / photon.mode.gamma_f;
    for (const cplx& z : filters.whitening.zeros) {
        fast = std::max(fast, std::abs(z));
        slow = std::max(slow, 1.0 / std::abs(z.real()));
    }
    // K(tau) = e^{A tau} G rings down at the open-loop mechanical rate.
    for (const cplx& p : filters.kernel_poles) slow = std::max(slow, 1.0 / std::abs(p.real()));
    const double dt = 1.0 / (20.0 * fast);
    const auto n = static_cast<std::size_t>(std::min<double>(static_cast<double>(max_points), std::ceil(10.0 * slow / dt) + 1.0));
    return sample_kernels(filters, photon, dt, std::max<std::size_t>(n, 2));
}

}  // namespace optomech
