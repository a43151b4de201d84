#include "optomech/pipeline.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kParamKeys = {"lambda_opt", "finesse", "mass", "omega_m", "Q_m",
                                             "temperature", "tau", "pump_power"};

double& param_ref(PhysicalParams& p, const std::string& key) {
    if (key == "lambda_opt") return p.lambda_opt;
    if (key == "finesse") return p.finesse;
    if (key == "mass") return p.mass;
    if (key == "omega_m") return p.omega_m;
    if (key == "Q_m") return p.Q_m;
    if (key == "temperature") return p.temperature;
    if (key == "tau") return p.tau;
    return p.pump_power;
}

template <class T>
T read(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

ordered_json pair(double a, double b) { return ordered_json::array({a, b}); }
ordered_json cjson(cplx z) { return pair(z.real(), z.imag()); }
ordered_json mjson(const Eigen::Matrix2d& m) {
    return ordered_json::array({pair(m(0, 0), m(0, 1)), pair(m(1, 0), m(1, 1))});
}
ordered_json report_json(const ConditionReport& r) {
    return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"margin", std::isfinite(r.margin) ? json(r.margin) : json("inf")},
            {"pass", r.pass}};
}

bool all_finite(const ordered_json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_null()) return false;
    if (j.is_structured())
        for (const auto& v : j)
            if (!all_finite(v)) return false;
    return true;
}

// Output files are staged under "<name>.partial" and promoted once the run succeeds.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
        for (const char* n : {"summary.json", "wigner.csv", "kernels.csv", "outcome_density.csv"}) {
            std::error_code ec;
            fs::remove(dir_ / n, ec);
            fs::remove(dir_ / (std::string(n) + ".partial"), ec);
        }
    }
    fs::path staged(const std::string& name) {
        names_.push_back(name);
        return dir_ / (name + ".partial");
    }
    void promote() {
        for (const auto& n : names_) fs::rename(dir_ / (n + ".partial"), dir_ / n);
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

void write_wigner(const fs::path& path, const WignerGrid& w) {
    auto out = fmt::output_file(path.string());
    out.print("# axes: X [{:.10e}, {:.10e}] P [{:.10e}, {:.10e}]\n", w.x_axis.start, w.x_axis.back(),
              w.p_axis.start, w.p_axis.back());
    out.print("# grid: nx={} np={} dX={:.10e} dP={:.10e}\n", w.x_axis.n, w.p_axis.n, w.x_axis.step, w.p_axis.step);
    out.print("# ledger: {}\n", ledger::version);
    out.print("X,P,W\n");
    for (std::size_t i = 0; i < w.x_axis.n; ++i)
        for (std::size_t j = 0; j < w.p_axis.n; ++j)
            out.print("{:.10e},{:.10e},{:.10e}\n", w.x_axis[i], w.p_axis[j], w.at(i, j));
}

void write_kernels(const fs::path& path, const KernelTable& k) {
    auto out = fmt::output_file(path.string());
    out.print("# kernels on t <= 0; K = (K_x, K_p) Wiener kernels, L photon commutator kernel\n");
    out.print("# samples={} tail_ratio={:.3e}\n", k.t.size(), k.tail_ratio);
    out.print("# ledger: {}\n", ledger::version);
    out.print("t,K_x,K_p,Re_L,Im_L\n");
    for (std::size_t i = 0; i < k.t.size(); ++i)
        out.print("{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n", k.t[i], k.K_x[i], k.K_p[i], k.L[i].real(),
                  k.L[i].imag());
}

void write_density(const fs::path& path, const OutcomeDensity& d) {
    auto out = fmt::output_file(path.string());
    out.print("# outcome density w[Z], rank {}\n", d.rank());
    if (d.rank() == 2) {
        const double half = 5.0 * std::sqrt(d.eigenvalues()(1));
        const Axis ax = Axis::centered(0.0, half, 101);
        out.print("# grid: {}x{} over Re Z, Im Z in [{:.6e}, {:.6e}]\n", ax.n, ax.n, ax.start, ax.back());
        out.print("# ledger: {}\n", ledger::version);
        out.print("Re_Z,Im_Z,w\n");
        for (std::size_t i = 0; i < ax.n; ++i)
            for (std::size_t j = 0; j < ax.n; ++j)
                out.print("{:.10e},{:.10e},{:.10e}\n", ax[i], ax[j], d(cplx(ax[i], ax[j])));
    } else if (d.rank() == 1) {
        const double half = 5.0 * std::sqrt(d.eigenvalues()(1));
        const Axis ax = Axis::centered(0.0, half, 401);
        out.print("# support is the line Z = t ({:.6e}, {:.6e}); w is the density in t\n", d.axis().real(),
                  d.axis().imag());
        out.print("# ledger: {}\n", ledger::version);
        out.print("Re_Z,Im_Z,w\n");
        for (std::size_t i = 0; i < ax.n; ++i)
            out.print("{:.10e},{:.10e},{:.10e}\n", ax[i] * d.axis().real(), ax[i] * d.axis().imag(), d.on_line(ax[i]));
    } else {
        out.print("# point mass at Z = 0\n# ledger: {}\nRe_Z,Im_Z,w\n", ledger::version);
        out.print("{:.10e},{:.10e},{:.10e}\n", 0.0, 0.0, 1.0);
    }
}

ordered_json summary_json(const RunReport& r, const std::string& status, const std::string& error) {
    ordered_json j;
    j["ledger"] = ledger::version;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    // The output location is not part of the result; runs into different directories compare equal.
    j["config"] = r.config.to_json();
    j["config"].erase("out_dir");
    const DerivedScales& s = r.scales;
    j["derived_scales"] = {{"x_q", s.x_q}, {"p_q", s.p_q}, {"N_gamma", s.N_gamma}, {"alpha", s.alpha},
                           {"kappa", s.kappa}, {"n_th", s.n_th}, {"gamma_m", s.gamma_m},
                           {"Lambda", s.Lambda}, {"Omega_q", s.Omega_q}};
    j["conditions"] = {{"vacuum", report_json(r.vacuum)},
                       {"thermal", report_json(r.thermal)},
                       {"minimal_pump_power", r.minimal_pump_power}};
    if (status == "ok") {
        const FilterSet& f = r.filters;
        ordered_json poles = ordered_json::array();
        for (const cplx& z : f.whitening.zeros) poles.push_back(cjson(z));
        j["filter"] = {{"V_c", mjson(f.V_c)},
                       {"det_V_c", f.V_c.determinant()},
                       {"Sigma_prior", mjson(f.Sigma_prior)},
                       {"gain", pair(f.gain(0), f.gain(1))},
                       {"closed_loop_poles", poles},
                       {"decorrelation_residual", f.decorrelation_residual}};
        const PhotonKernels& k = r.photon;
        const Eigen::Matrix2d Vinv = f.V_c.inverse();
        const double gvg = (k.gamma_vec.transpose() * Vinv.cast<cplx>() * k.gamma_vec.conjugate())(0).real();
        j["photon"] = {{"gamma_f", k.mode.gamma_f},
                       {"omega_f", k.mode.omega_f},
                       {"L_norm_sq", k.L_norm_sq},
                       {"c_L", cjson(k.c_L)},
                       {"gamma", ordered_json::array({cjson(k.gamma_vec(0)), cjson(k.gamma_vec(1))})},
                       {"gamma_Vc_inv_gamma", gvg},
                       {"V_L", mjson(k.V_L)}};
        j["outcome"] = {{"source", r.config.outcome == OutcomePolicy::sample ? "sampled"
                                   : r.config.outcome == OutcomePolicy::explicit_value ? "explicit"
                                                                                       : "most_probable"},
                        {"seed", r.outcome.seed},
                        {"Z", cjson(r.outcome.Z)},
                        {"x_c", pair(r.outcome.x_c(0), r.outcome.x_c(1))},
                        {"density_integral", r.density_integral}};
        j["wigner"] = {{"grid", ordered_json::array({r.config.grid_n, r.config.grid_n})},
                       {"integral", r.wigner_integral},
                       {"min_value", r.metrics.min_value},
                       {"min_location", pair(r.metrics.min_x, r.metrics.min_p)},
                       {"negative_volume", r.metrics.negative_volume},
                       {"purity", r.metrics.purity},
                       {"within_wigner_bound", r.within_wigner_bound}};
        j["warnings"] = r.warnings;
    }
    return j;
}

void write_summary(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------- config

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "scenario", "lambda_opt", "finesse", "mass", "omega_m", "Q_m", "temperature", "tau", "pump_power",
        "omega_0", "gamma_f", "omega_f", "theta", "outcome", "seed", "z_re", "z_im", "grid_n", "out_dir"};
    return keys;
}

Scenario parse_scenario(const std::string& name) {
    if (name == "large_scale") return Scenario::large_scale;
    if (name == "small_scale") return Scenario::small_scale;
    if (name == "custom") return Scenario::custom;
    throw ConfigError("unknown scenario '" + name + "' (expected large_scale, small_scale or custom)");
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::large_scale: return "large_scale";
        case Scenario::small_scale: return "small_scale";
        default: return "custom";
    }
}

OutcomePolicy parse_outcome(const std::string& name) {
    std::string n = name;
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "most_probable") return OutcomePolicy::most_probable;
    if (n == "sample") return OutcomePolicy::sample;
    if (n == "explicit") return OutcomePolicy::explicit_value;
    throw ConfigError("unknown outcome policy '" + name + "' (expected most-probable, sample or explicit)");
}

std::string outcome_name(OutcomePolicy p) {
    switch (p) {
        case OutcomePolicy::sample: return "sample";
        case OutcomePolicy::explicit_value: return "explicit";
        default: return "most_probable";
    }
}

RunConfig preset(Scenario s) {
    RunConfig c;
    c.scenario = s;
    PhysicalParams& p = c.params;
    if (s == Scenario::large_scale) {
        p.lambda_opt = 1e-6;
        p.finesse = 6000.0;
        p.mass = 4.0;
        p.omega_m = two_pi * 1.0;
        p.Q_m = 1e8;
        p.temperature = 300.0;
        p.tau = 1e-3;
        p.pump_power = 100.0;
        c.photon = {two_pi * 70.0, two_pi * 70.0};
    } else if (s == Scenario::small_scale) {
        p.lambda_opt = 1e-6;
        p.finesse = 1e4;
        p.mass = 1e-12;
        p.omega_m = two_pi * 1e5;
        p.Q_m = 1e7;
        p.temperature = 4.0;
        p.tau = 1e-5;
        p.pump_power = 1e-7;
        c.photon = {0.3 * p.omega_m, 0.1 * p.omega_m};
    }
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["scenario"] = scenario_name(scenario);
    j["lambda_opt"] = params.lambda_opt;
    j["finesse"] = params.finesse;
    j["mass"] = params.mass;
    j["omega_m"] = params.omega_m;
    j["Q_m"] = params.Q_m;
    j["temperature"] = params.temperature;
    j["tau"] = params.tau;
    j["pump_power"] = params.pump_power;
    j["omega_0"] = params.carrier_frequency();
    j["gamma_f"] = photon.gamma_f;
    j["omega_f"] = photon.omega_f;
    j["theta"] = theta;
    j["outcome"] = outcome_name(outcome);
    j["seed"] = seed;
    j["z_re"] = z_explicit.real();
    j["z_im"] = z_explicit.imag();
    j["grid_n"] = grid_n;
    j["out_dir"] = out_dir;
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto& keys = config_keys();
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            std::string list;
            for (const auto& name : keys) list += (list.empty() ? "" : ", ") + name;
            throw ConfigError("unknown config key '" + k + "'; valid keys: " + list);
        }
    }
    const Scenario scen = j.contains("scenario") ? parse_scenario(read<std::string>(j, "scenario")) : Scenario::custom;
    RunConfig c = preset(scen);

    if (scen == Scenario::custom) {
        std::vector<std::string> missing;
        for (const auto& k : kParamKeys)
            if (!j.contains(k)) missing.push_back(k);
        for (const char* k : {"gamma_f", "omega_f"})
            if (!j.contains(k)) missing.emplace_back(k);
        if (!missing.empty()) {
            std::string list;
            for (const auto& name : missing) list += (list.empty() ? "" : ", ") + name;
            throw ConfigError("custom scenario requires fields: " + list);
        }
    }
    for (const auto& k : kParamKeys)
        if (j.contains(k)) param_ref(c.params, k) = read<double>(j, k);
    if (j.contains("omega_0")) c.params.omega_0 = read<double>(j, "omega_0");
    // The small-scale photon mode is defined relative to omega_m and follows overrides of it.
    if (scen == Scenario::small_scale) c.photon = {0.3 * c.params.omega_m, 0.1 * c.params.omega_m};
    if (j.contains("gamma_f")) c.photon.gamma_f = read<double>(j, "gamma_f");
    if (j.contains("omega_f")) c.photon.omega_f = read<double>(j, "omega_f");
    if (j.contains("theta")) c.theta = read<double>(j, "theta");
    if (j.contains("outcome")) c.outcome = parse_outcome(read<std::string>(j, "outcome"));
    if (j.contains("seed")) c.seed = read<std::uint64_t>(j, "seed");
    if (j.contains("z_re")) c.z_explicit.real(read<double>(j, "z_re"));
    if (j.contains("z_im")) c.z_explicit.imag(read<double>(j, "z_im"));
    if (j.contains("grid_n")) c.grid_n = read<std::size_t>(j, "grid_n");
    if (j.contains("out_dir")) c.out_dir = read<std::string>(j, "out_dir");

    validate(c.params);
    c.photon.validate();
    if (!std::isfinite(c.theta)) throw ConfigError("theta must be finite");
    if (c.grid_n < 8 || c.grid_n > 4096) throw ConfigError("grid_n must lie in [8, 4096]");
    if (!std::isfinite(c.z_explicit.real()) || !std::isfinite(c.z_explicit.imag()))
        throw ConfigError("z_re/z_im must be finite");
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------- pipeline

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const InvariantViolation*>(&e)) return 3;
    return 4;
}

RunReport run_pipeline(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport r;
    r.config = cfg;
    Outputs files(cfg.out_dir);
    const fs::path summary_path = files.staged("summary.json");
    try {
        r.scales = derive_scales(cfg.params);
        r.vacuum = check_vacuum_condition(r.scales);
        r.thermal = check_thermal_condition(r.scales);
        r.minimal_pump_power = minimal_pump_power(cfg.params);
        if (!r.vacuum.pass) r.warnings.emplace_back("vacuum readout condition fails (kappa <= 1)");
        if (!r.thermal.pass) r.warnings.emplace_back("thermal condition fails");

        r.plant = plant_from_scales(r.scales, cfg.theta);
        const CausalFactor phi = spectral_factorize(output_spectrum(r.plant));
        r.filters = whitened_cross_kernels(r.plant, phi);
        r.photon = photon_kernels(r.plant, r.filters, cfg.photon);
        write_kernels(files.staged("kernels.csv"), sample_kernels_auto(r.plant, r.filters, r.photon));

        const OutcomeDensity density = outcome_density(r.photon);
        r.density_integral = density.integrate();
        if (std::abs(r.density_integral - 1.0) > 1e-6)
            throw InvariantViolation("outcome density integrates to " + std::to_string(r.density_integral));
        write_density(files.staged("outcome_density.csv"), density);

        switch (cfg.outcome) {
            case OutcomePolicy::most_probable: r.outcome = most_probable_outcome(r.photon); break;
            case OutcomePolicy::sample: r.outcome = sample_outcome(r.photon, cfg.seed); break;
            case OutcomePolicy::explicit_value:
                r.outcome.Z = cfg.z_explicit;
                r.outcome.source = OutcomeSource::explicit_value;
                break;
        }

        PhaseSpaceWindow win;
        win.nx = win.np = cfg.grid_n;
        const WignerGrid w = wigner_single_photon(r.photon, r.filters, r.outcome, win);
        r.within_wigner_bound = check_wigner_invariants(w);
        if (!r.within_wigner_bound) r.warnings.emplace_back("Wigner values below -1/(2 pi) on the grid");
        r.wigner_integral = w.integral();
        r.metrics = negativity_metrics(w);
        write_wigner(files.staged("wigner.csv"), w);

        const ordered_json summary = summary_json(r, "ok", "");
        if (!all_finite(summary)) throw InvariantViolation("summary contains non-finite values");
        write_summary(summary_path, summary);
        files.promote();
    } catch (const std::exception& e) {
        write_summary(summary_path, summary_json(r, "failed", e.what()));
        throw;
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace optomech
