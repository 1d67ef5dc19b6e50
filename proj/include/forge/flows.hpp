#pragma once

#include <complex>
#include <map>
#include <vector>

#include "forge/cutoffs.hpp"
#include "forge/field.hpp"

namespace forge {

struct TimeGrid {
    double dt = 0.0;
    int nt = 0;  // samples are 0..nt
    double t(int i) const { return dt * i; }
    double horizon() const { return dt * nt; }
};

// Band-limited space-time velocity evaluated at arbitrary points: exact
// Fourier summation over the active modes of the cubic-Lagrange-in-time
// combination of the stored snapshots. Snapshots are cached per distinct
// evaluation time (RK4 stage times are commensurate with dt).
class VelocityInterpolant {
  public:
    VelocityInterpolant(const std::vector<Field>* u_hat, TimeGrid tg, int time_substeps,
                        double prune_tol = 1e-14);

    struct Snapshot {
        std::vector<std::array<double, 3>> k;       // wavevectors (half-space + DC)
        std::vector<std::array<cplx, 3>> c;         // coefficients
        std::vector<double> weight;                 // 1 for DC, 2 for paired modes
        double max_speed = 0.0;
    };

    const Snapshot& at_time(double s) const;
    static void eval(const Snapshot& snap, const double y[3], double out[3]);

  private:
    const std::vector<Field>* u_;
    TimeGrid tg_;
    int key_scale_;
    double prune_tol_;
    mutable std::map<long long, Snapshot> cache_;
};

// Back-to-labels map of one cutoff window, anchored at t = j/mu:
// Phi_j(anchor) = x exactly; stored as the periodic displacement
// psi = Phi_j - x on the grid, with its spectral representation.
struct FlowMap {
    int j = 0;
    int i0 = 0, i1 = 0;  // slice window (inclusive)
    TimeGrid tg;
    std::vector<RealField> psi;
    std::vector<Field> psi_hat;

    const RealField& psi_at(int i) const { return psi.at(i - i0); }
    const Field& psi_hat_at(int i) const { return psi_hat.at(i - i0); }
};

// Semi-group construction of the transported phases: one dt interval at a
// time (RK4 characteristics with `substeps` sub-intervals, exact spectral
// velocity interpolation) composed with the previously built map.
std::vector<FlowMap> solve_flows(const std::vector<Field>& u_hat, TimeGrid tg,
                                 const CutoffFamily& cutoffs, int substeps);

// Transport defect || [d_t + u.grad] Phi_j ||_C0 measured with centered
// differences on the stored window; diagnostic for refinement studies.
double flow_transport_defect(const FlowMap& fm, const std::vector<Field>& u_hat);

}  // namespace forge
