#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "forge/cutoffs.hpp"
#include "forge/field.hpp"
#include "forge/flows.hpp"
#include "forge/waves.hpp"

namespace forge {

// One stage of the Reynolds iteration on a shared time grid.
struct IterationState {
    int stage = 0;
    TimeGrid tg;
    double L = 2.0;
    double alpha = 0.25;
    std::vector<Field> v;       // divergence-free velocity snapshots
    std::vector<Field> p;       // scalar pressure
    std::vector<Field> stress;  // symmetric trace-free matrix snapshots
    std::string provenance;
};

// prescribed energy profile M(t) = L^4 e^{4Lt}
inline double energy_M(double L, double t) { return std::pow(L, 4) * std::exp(4.0 * L * t); }

// Stage-0 triple: shear velocity with the M(t)^{1/2} profile, the matching
// stress (symmetrized; the antisymmetric entry has zero divergence either
// way) plus the noise outer products, and p = tr(R)/3.
IterationState starting_triple(double L, const TorusGrid& grid, const std::vector<Field>& z,
                               TimeGrid tg, double alpha);

struct Mollified {
    double ell = 0.0;
    std::vector<Field> v_ell, z_ell;  // vector
    std::vector<Field> R_ell;         // matrix, traceless
    std::vector<Field> p_ell;         // scalar
    std::vector<Field> R_com;         // matrix, traceless
};

// Space mollification by a positive-transform compact bump of radius ell
// (spectral multiplier), causal time mollification by a discrete bump on
// [0, ell] (constant extension at the ends); the commutator stress and
// pressure correction assembled on the same grid.
Mollified mollify_state(const IterationState& state, const std::vector<Field>& z, double ell);

// mollifier pieces, used directly by tests
double space_mollifier_multiplier(double ell_times_kmag);
std::vector<double> causal_time_weights(double ell, double dt);

// surrogate-mode scales for one q -> q+1 step
struct Scales {
    double lambda = 0.0;       // lambda_{q+1}, positive multiple of n0
    double delta = 0.0;        // delta_{q+1}
    double delta_next = 0.0;   // delta_{q+2}, for the (A.3) ratio line
    double ell = 0.0;
    double mu = 0.0;
    double c_R = 0.0;
};

struct LedgerRatioRow {
    std::string inequality;  // "A.1", "A.2", "A.3"
    double t;
    double measured;
    double bound;
    double ratio;
};

struct StressBreakdownSeries {
    std::array<std::string, 7> names = {"transport",   "oscillation", "corrector", "nash",
                                        "dissipation", "z",           "commutator"};
    std::vector<double> t;
    std::vector<std::array<double, 7>> c0;
    std::vector<std::array<double, 7>> l2;
};

struct IterateOptions {
    int substeps = 8;
    std::vector<double> cancellation_times;  // evaluate the Lemma-3.4 identity here
    bool collect_ratios = true;
};

struct IterateResult {
    IterationState next;
    StressBreakdownSeries breakdown;
    std::vector<LedgerRatioRow> ratios;
    double max_r_ratio = 0.0;          // sup ||R_ell||_C0 / (M delta c_R^{1/2})
    double div_w_rel_max = 0.0;        // spectral divergence of the perturbation
    double max_L_c0 = 0.0;             // max ||L_{j,xi}||_C0
    double max_w_c0 = 0.0;
    double cancellation_max_rel = -1.0;
    double osc_consistency_rel = -1.0;  // div(wp wp + R_ell) - div R_osc - grad p_osc
    double wave_D = 0.0;               // D constant used for the (3.26) line
};

// One full q -> q+1 step: mollify, cutoffs, flows, perturbation, stress.
// Aborts with a domain error naming time and ratio when the r0
// precondition fails.
IterateResult iterate(const IterationState& state, const std::vector<Field>& z,
                      const WaveSystem& ws, const Scales& s, const IterateOptions& opt);

// Standalone Lemma-3.4 check on a surrogate stage (no stress assembly, so
// lambda may exceed the grid band; everything is evaluated pointwise).
struct CancellationReport {
    std::vector<double> t;
    std::vector<double> rel_residual;
    double max_rel = 0.0;
    double scale = 0.0;  // M delta c_R^{1/2} sqrt(3) at the worst time
};
CancellationReport run_cancellation_check(const IterationState& state,
                                          const std::vector<Field>& z, const WaveSystem& ws,
                                          const Scales& s, int substeps,
                                          const std::vector<double>& times);

struct ResidualSeries {
    std::vector<double> t, l2, c0, rel;  // rel = c0 residual / term scale
    double interior_max_rel = 0.0;       // over stencil-complete interior times
    double full_max_rel = 0.0;
    double term_scale = 0.0;
};

// d_t v + div((v+z)(x)(v+z)) + grad p + (-D)^a v - div(R) on the state's
// grid: spectral in space, 4th-order centered FD interior, 2nd-order
// one-sided at the series ends.
ResidualSeries residual_check(const IterationState& state, const std::vector<Field>& z);

struct EnergyGapReport {
    double T = 0.0;
    double u_energy = 0.0;          // ||u(T)||_L2^2
    double u0_energy = 0.0;
    double threshold = 0.0;         // K (||u(0)||^2 + T Tr GG*)
    double galerkin_bound = 0.0;    // ||x0||^2 + T Tr GG*
    double K = 4.0;
    double trace = 0.0;
    bool gap_exhibited = false;
    std::string verdict;
};
EnergyGapReport energy_gap_report(const std::vector<Field>& v, const std::vector<Field>& z,
                                  TimeGrid tg, double T, double K, double trace);

}  // namespace forge
