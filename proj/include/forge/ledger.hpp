#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/logval.hpp"

namespace forge {

// Full parameter tuple of the iteration at true scale. a is handled in
// log form by the evaluation routines (it is the searched quantity and
// becomes astronomically large); everything else is fixed up front.
struct LedgerParams {
    int b = 6;        // even integer > 5, b/2 in N
    int c = 15;       // integer > max(2/beta, 8/3 (1/2-2delta)^{-1}, (1/2-alpha)^{-1})
    double alpha = 0.25;
    double sigma = 1.0 / 64.0;
    double delta = 1.0 / 64.0;
    double eps = 1.0 / 16.0;     // < min(1/2 - alpha, beta/2)
    int n0 = 5;                  // geometric constant from the wave families
    double r0 = 0.0;             // certified radius (waves)
    double D = 0.0;              // C^{N0} budget constant (waves)
    double c0 = 1e3;             // bound on the implicit absolute constants
    double margin = 1e3;         // numeric stand-in for "<<"
    double T = 1.0;              // horizon in the energy condition L > ln(11)/T
    int q_max = 10;

    double beta() const { return double(b - 1) / double(5 * b + 5); }
    int N0() const { return int(std::ceil((1.0 + eps) / beta())) + 1; }

    // policy-derived: ln c_R = min(2 ln r0, -4 ln(4 D c0)),
    // ln L = max(ln(20 (2pi)^3) - ln c_R, ln(ln 11 / T), ln 2)
    double ln_c_R() const;
    double ln_L() const;
    double ln_M0() const;        // ln M(0) = 4 ln L
    double ln_M_L_half() const;  // ln M(L)^{1/2} = 2 ln L + 2 L^2
    double ln_C_L() const;
};

// lambda_q = 2 a^{c b^{q+1} - b/2}, delta_q = a^{b - b^q} / (4 (2pi)^3),
// ell and mu per their defining exponent combinations.
LogVal log_lambda(const LedgerParams& p, int q);
LogVal log_delta(const LedgerParams& p, int q);
LogVal log_ell(const LedgerParams& p, int q);
LogVal log_mu(const LedgerParams& p, int q);

struct ScaleRow {
    int q;
    double log2_lambda, log2_delta, log2_ell, log2_mu;
};
std::vector<ScaleRow> derive_scales(const LedgerParams& p, double ln_a, int q_max);

struct ConstraintResult {
    std::string name;
    int q = -1;  // -1 for q-independent conditions
    double log_slack = 0.0;
    bool pass = false;
};

struct LedgerReport {
    std::vector<ConstraintResult> rows;
    bool pass = false;
    double ln_a = 0.0;
};

// Every inequality of the parameter sections evaluated at the given a
// (as ln a), for q <= q_max. "<<" uses the margin; plain comparisons are
// exact. Failures are data, not errors.
LedgerReport check_constraints(const LedgerParams& p, double ln_a);

struct MinAResult {
    double ln_a = 0.0;
    double log2_a = 0.0;
    std::optional<unsigned long long> a_exact;  // when it fits an integer
    std::string binding_constraint;
    bool satisfiable = false;
    bool monotone_bracket_ok = false;
};

// Least admissible a (multiples of n0 when representable; otherwise the
// log-scale threshold). Bisection on ln a; monotonicity is verified
// empirically on the bracketing pair.
MinAResult find_min_a(const LedgerParams& p, double log2_cap = double(1 << 20));

void write_ledger_json(const LedgerParams& p, const LedgerReport& rep,
                       const std::filesystem::path& path);
void write_min_a_json(const LedgerParams& p, const MinAResult& res,
                      const std::vector<std::pair<double, double>>& c0_sensitivity,
                      const std::filesystem::path& path);

}  // namespace forge
