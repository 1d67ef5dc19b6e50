#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "forge/field.hpp"
#include "forge/ou.hpp"
#include "forge/spectrum.hpp"

namespace forge {

// Fourier-Galerkin ensemble solver for the full stochastic equation on
// the band |k|_inf <= K_G. One step is exponential Euler: the projected
// nonlinear drift explicit, dissipation by its exact integrating factor,
// and the noise increment drawn exactly as in simulate_ou (same streams,
// same update arithmetic), so the nonlinearity-off run reproduces the OU
// path bit-identically.
struct GalerkinConfig {
    int K_G = 8;
    double dt = 1e-3;
    double T = 1.0;
    int ensemble = 200;
    std::uint64_t seed = 1;
    NoiseSpectrum spec;
    Field x0;  // divergence-free, band-limited to K_G
    double noise_amp = 1.0;
    NoiseModel model = NoiseModel::exact_ou;
    double h_base = 0.0;               // bridge refinement base step
    std::optional<Field> drift_bias;   // negative-control hook
    bool nonlinear = true;
    int store_every = 0;               // >0: retain path 0 snapshots
    int retain_paths = 0;              // how many paths to retain

    TorusGrid work_grid() const {
        int n = 3 * K_G;
        if (n % 2) ++n;
        return TorusGrid(std::max(8, n));
    }
    void validate() const;
};

struct EnsembleStats {
    std::vector<double> times;                    // every step
    std::vector<double> mean_energy, se_energy;   // E ||x||^2
    std::vector<double> mean_dissipation;         // E ||(-Delta)^{a/2} x||^2
    std::vector<double> identity_residual;        // mean of per-path Ito defect
    std::vector<double> identity_z;               // defect / SE
    double trace_truncated = 0.0;                 // Tr(Pi GG* Pi)
    double trace_full = 0.0;                      // Tr(GG*) of the spectrum
    // per-path terminal values and running functionals for moment reports
    std::vector<std::vector<double>> path_sup_energy;   // [path][checkpoint]
    std::vector<std::vector<double>> path_diss_int;     // int ||x||_{H^alpha}^2 (gamma = alpha)
    std::vector<double> checkpoint_times;
};

struct StepView {
    int path = 0;
    int step = 0;  // state index after `step` updates
    double t = 0.0;
    const Field& x_hat;
    const Field& f_alpha_hat;  // band-truncated drift -P div(x(x)x) - (-D)^a x
};
using StepObserver = std::function<void(const StepView&)>;

struct GalerkinResult {
    EnsembleStats stats;
    std::vector<std::vector<Field>> retained;  // [path][snapshot]
    double snapshot_dt = 0.0;
};

GalerkinResult run_ensemble(const GalerkinConfig& cfg, const StepObserver& observer = nullptr);

// E[sup_{u<=t} ||x||^{2q} + int_0^t ||x||^{2(q-1)} ||x||_{H^gamma}^2] per
// checkpoint, with gamma = alpha, against the fitted envelope
// C_{t,q} (||x0||^{2q} + 1).
struct MomentRow {
    double t;
    int q;
    double lhs_mean, lhs_se;
    double fitted_C;
};
std::vector<MomentRow> moment_report(const EnsembleStats& stats, const std::vector<int>& q_list,
                                     double x0_l2);

}  // namespace forge
