#include "forge/ledger.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "forge/grid.hpp"

namespace forge {

namespace {

const double kLn2pi3 = 3.0 * std::log(kTwoPi);

long long ipow_checked(long long base, int e) {
    __int128 v = 1;
    for (int i = 0; i < e; ++i) {
        v *= base;
        if (v > __int128(INT64_MAX) / (2 * base)) throw std::overflow_error("ledger: b^q overflow");
    }
    return (long long)v;
}

}  // namespace

double LedgerParams::ln_c_R() const {
    if (r0 <= 0.0 || D <= 0.0) throw std::invalid_argument("ledger: r0/D not set (build waves first)");
    return std::min(2.0 * std::log(r0), -4.0 * std::log(4.0 * D * c0));
}

double LedgerParams::ln_L() const {
    const double from_cR = std::log(20.0) + kLn2pi3 - ln_c_R();
    const double from_T = std::log(std::log(11.0) / T);
    return std::max({from_cR, from_T, std::log(2.0)});
}

double LedgerParams::ln_M0() const { return 4.0 * ln_L(); }

double LedgerParams::ln_M_L_half() const {
    const double L = std::exp(ln_L());
    if (!std::isfinite(L * L)) throw std::overflow_error("ledger: L^2 exceeds double range");
    return 2.0 * ln_L() + 2.0 * L * L;
}

double LedgerParams::ln_C_L() const {
    const double c_t3 = std::pow(kPi, 1.5);  // ||x||_C0 on [-pi,pi]^3
    const double ln_ct3p1 = std::log(c_t3 + 1.0);
    const double inner = log_sum_exp({0.0, std::log(2.0) + ln_M_L_half(), 0.25 * ln_L()});
    return log_sum_exp({std::log(c_t3), ln_ct3p1 + inner});
}

LogVal log_lambda(const LedgerParams& p, int q) {
    const long long e = (long long)p.c * ipow_checked(p.b, q + 1);
    return LogVal{Rat(e) - Rat(p.b, 2), std::log(2.0)};
}

LogVal log_delta(const LedgerParams& p, int q) {
    const long long bq = ipow_checked(p.b, q);
    return LogVal{Rat(p.b) - Rat(bq), -std::log(4.0) - kLn2pi3};
}

LogVal log_ell(const LedgerParams& p, int q) {
    LogVal v = log_delta(p, q + 1).pow(Rat(-1, 8)) * log_delta(p, q).pow(Rat(1, 8)) *
               log_lambda(p, q).pow(Rat(-1, 4)) * log_lambda(p, q + 1).pow(Rat(-3, 4));
    return v;
}

LogVal log_mu(const LedgerParams& p, int q) {
    return log_delta(p, q + 1).pow(Rat(1, 4)) * log_delta(p, q).pow(Rat(1, 4)) *
           log_lambda(p, q).pow(Rat(1, 2)) * log_lambda(p, q + 1).pow(Rat(1, 2));
}

std::vector<ScaleRow> derive_scales(const LedgerParams& p, double ln_a, int q_max) {
    std::vector<ScaleRow> rows;
    const double ln2 = std::log(2.0);
    for (int q = 0; q <= q_max; ++q) {
        ScaleRow r;
        r.q = q;
        r.log2_lambda = log_lambda(p, q).eval(ln_a) / ln2;
        r.log2_delta = log_delta(p, q).eval(ln_a) / ln2;
        r.log2_ell = log_ell(p, q).eval(ln_a) / ln2;
        r.log2_mu = log_mu(p, q).eval(ln_a) / ln2;
        rows.push_back(r);
    }
    return rows;
}

LedgerReport check_constraints(const LedgerParams& p, double ln_a) {
    LedgerReport rep;
    rep.ln_a = ln_a;
    const double beta = p.beta();
    const double ln_margin = std::log(p.margin);
    const double lnL = p.ln_L();
    const double ln_cR = p.ln_c_R();
    const double lnCL = p.ln_C_L();
    const double lnMLh = p.ln_M_L_half();

    auto push = [&](const std::string& name, int q, double slack, bool strict = false) {
        ConstraintResult r;
        r.name = name;
        r.q = q;
        r.log_slack = slack;
        r.pass = strict ? (slack > 0.0) : (slack >= 0.0);
        rep.rows.push_back(r);
    };

    // ---- parameter-level conditions --------------------------------------
    push("alpha_range", -1, std::min(p.alpha, 0.5 - p.alpha), true);
    push("b_even_gt5", -1, (p.b % 2 == 0 && p.b > 5) ? 1.0 : -1.0, true);
    const double b_low = (8.0 / 3.0) / (0.5 - 2.0 * p.delta);
    push("b_lower_bound", -1, std::log(double(p.b)) - std::log(b_low), true);
    const double c_low = std::max({2.0 / beta, b_low, 1.0 / (0.5 - p.alpha)});
    push("c_lower_bound", -1, std::log(double(p.c)) - std::log(c_low), true);
    const double eps_cap = std::min(0.5 - p.alpha, beta / 2.0);
    push("eps_bound", -1, std::log(eps_cap) - std::log(p.eps), true);
    push("N0_definition", -1, p.N0() == int(std::ceil((1.0 + p.eps) / beta)) + 1 ? 0.0 : -1.0);
    const double cr_cap = std::min(2.0 * std::log(p.r0), -4.0 * std::log(4.0 * p.D * p.c0));
    push("c_R_restriction", -1, cr_cap - ln_cR);
    push("cond_on_L_lower", -1, lnL - (std::log(20.0) + kLn2pi3 - ln_cR));
    // L <= (a^2 - 2)/2  <=>  a^2 >= 2L + 2
    push("cond_on_L_upper", -1, 2.0 * ln_a - log_sum_exp({std::log(2.0) + lnL, std::log(2.0)}));
    push("cond_L_large_T", -1, lnL - std::log(std::log(11.0) / p.T), true);

    // stationary-phase exponent conditions on (b, c, eps, N0)
    const double b2 = double(p.b) * p.b;
    push("exp_tra_osc", -1, -(((p.eps - beta) * p.c + 1.0) * b2 - 0.5 * p.b), true);
    push("exp_tail_N0", -1, -(b2 * ((1.0 - beta * p.N0() + p.eps) - beta * p.c + 1.0) - 0.5 * p.b),
         true);
    push("exp_diss", -1, -((2.0 * p.alpha + 2.0 * p.eps - 1.0) * p.c + 1.0), true);
    const double gamma_rep = 1.0 / (4.0 * p.b * p.c);
    push("holder_window", -1, 0.5 - p.c * p.b * gamma_rep, true);

    // Lemma on the starting triple: 2 + 2L <= a^{cb - 1/2}, and the R_0
    // chain at t = 0: (2L+1) M0^{1/2} + M0^{1/2} L^{1/4} + L^{1/2}
    // <= 5 M0 / L <= M0 delta_1 c_R.
    push("lemma31_K", -1,
         (double(p.c) * p.b - 0.5) * ln_a - log_sum_exp({std::log(2.0), std::log(2.0) + lnL}));
    const double lnM0h = 0.5 * p.ln_M0();
    const double lhs_R0 = log_sum_exp({log_sum_exp({std::log(2.0) + lnL, 0.0}) + lnM0h,
                                       lnM0h + 0.25 * lnL, 0.5 * lnL});
    push("lemma31_R0_sum", -1, std::log(5.0) + p.ln_M0() - lnL - lhs_R0);
    const double ln_delta1 = -std::log(4.0) - kLn2pi3;
    push("lemma31_R0_cap", -1, ln_delta1 + ln_cR - (std::log(5.0) - lnL));

    // geometric sum sum_{p>=1} delta_p^{1/2} <= 1
    {
        std::vector<double> terms;
        for (int pp = 1; pp <= p.q_max + 30 && pp <= 40; ++pp)
            terms.push_back(log_delta(p, pp).pow(Rat(1, 2)).eval(ln_a));
        push("geom_sum_sqrt_delta", -1, 0.0 - log_sum_exp(terms));
    }

    // ---- per-stage length-scale inequalities ------------------------------
    for (int q = 0; q <= p.q_max; ++q) {
        const double ld_q = log_delta(p, q).eval(ln_a);
        const double ld_q1 = log_delta(p, q + 1).eval(ln_a);
        const double ld_q2 = log_delta(p, q + 2).eval(ln_a);
        const double ll_q = log_lambda(p, q).eval(ln_a);
        const double ll_q1 = log_lambda(p, q + 1).eval(ln_a);
        const double le = log_ell(p, q).eval(ln_a);
        const double lm = log_mu(p, q).eval(ln_a);

        push("monotone_lambda", q, ll_q1 - ll_q, true);
        push("monotone_delta", q, ld_q - ld_q1, true);
        push("monotone_sqrtdelta_lambda", q, (0.5 * ld_q1 + ll_q1) - (0.5 * ld_q + ll_q), true);

        push("ls_orig_1", q, -(0.5 * ld_q + ll_q + le - 0.5 * ld_q1) - ln_margin);
        const double lhs2 = log_sum_exp({0.5 * ld_q + ll_q - lm, -(le + ll_q1)});
        push("ls_orig_2a", q, -beta * ll_q1 - lhs2);
        push("ls_orig_2b", q, (ld_q2 - ld_q1) - (-beta * ll_q1) - ln_margin);
        push("ls_orig_3", q, (0.5 * ld_q1 - lm) - (-ll_q1));

        push("ls_L_1", q, -(lnCL + lnMLh + 0.5 * ld_q + ll_q + le - 0.5 * ld_q1) - ln_margin);
        const double lhsL2 = log_sum_exp(
            {lnCL - (le + ll_q1),
             log_sum_exp({lnCL + lnMLh + 0.5 * ld_q + ll_q, 0.25 * lnL}) - lm});
        push("ls_L_2a", q, -beta * ll_q1 - lhsL2);
        push("ls_ell_delta", q, ld_q2 - (lnCL + (0.5 - 2.0 * p.delta) * le + 0.5 * ld_q + ll_q) -
                                    ln_margin);
        push("mu_ll_ellinv", q, -le - lm - ln_margin);

        std::vector<double> dl_terms;
        for (int pp = 0; pp <= q; ++pp)
            dl_terms.push_back(0.5 * log_delta(p, pp).eval(ln_a) + log_lambda(p, pp).eval(ln_a));
        push("geom_sum_delta_lambda", q,
             std::log(2.0) + 0.5 * ld_q + ll_q - log_sum_exp(dl_terms));
    }

    rep.pass = true;
    for (const auto& r : rep.rows) rep.pass = rep.pass && r.pass;
    return rep;
}

MinAResult find_min_a(const LedgerParams& p, double log2_cap) {
    MinAResult res;
    const double ln2 = std::log(2.0);
    double lo = std::log(std::max(2, p.n0));
    double hi = log2_cap * ln2;
    auto passes = [&](double la) { return check_constraints(p, la).pass; };
    if (!passes(hi)) {
        // name the binding constraint at the cap
        LedgerReport r = check_constraints(p, hi);
        double worst = 1e300;
        for (const auto& row : r.rows)
            if (!row.pass && row.log_slack < worst) {
                worst = row.log_slack;
                res.binding_constraint = row.name + (row.q >= 0 ? "[q=" + std::to_string(row.q) + "]" : "");
            }
        res.satisfiable = false;
        return res;
    }
    res.satisfiable = true;
    if (passes(lo)) {
        res.ln_a = lo;
        res.log2_a = lo / ln2;
        res.binding_constraint = "none (admissible at smallest a)";
        res.monotone_bracket_ok = true;
        res.a_exact = (unsigned long long)std::max(2, p.n0);
        return res;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid)) hi = mid;
        else lo = mid;
    }
    res.ln_a = hi;
    res.log2_a = hi / ln2;
    // binding constraint: most negative slack just below the threshold
    {
        LedgerReport r = check_constraints(p, lo);
        double worst = 1e300;
        for (const auto& row : r.rows)
            if (!row.pass && row.log_slack < worst) {
                worst = row.log_slack;
                res.binding_constraint = row.name + (row.q >= 0 ? "[q=" + std::to_string(row.q) + "]" : "");
            }
    }
    // empirical monotonicity on the bracketing pair: every slack improved
    {
        LedgerReport rlo = check_constraints(p, lo);
        LedgerReport rhi = check_constraints(p, hi);
        res.monotone_bracket_ok = true;
        for (std::size_t i = 0; i < rlo.rows.size(); ++i)
            if (rhi.rows[i].log_slack < rlo.rows[i].log_slack - 1e-9)
                res.monotone_bracket_ok = false;
    }
    if (res.log2_a <= 62.0) {
        unsigned long long a0 = (unsigned long long)std::ceil(std::exp(res.ln_a));
        a0 = ((a0 + p.n0 - 1) / p.n0) * p.n0;  // round up to a multiple of n0
        while (a0 > (unsigned long long)p.n0 && passes(std::log(double(a0 - p.n0)))) a0 -= p.n0;
        while (!passes(std::log(double(a0)))) a0 += p.n0;
        res.a_exact = a0;
        res.ln_a = std::log(double(a0));
        res.log2_a = res.ln_a / ln2;
    }
    return res;
}

void write_ledger_json(const LedgerParams& p, const LedgerReport& rep,
                       const std::filesystem::path& path) {
    nlohmann::json j;
    j["params"] = {{"b", p.b},         {"c", p.c},         {"alpha", p.alpha},
                   {"sigma", p.sigma}, {"delta", p.delta}, {"eps", p.eps},
                   {"N0", p.N0()},     {"n0", p.n0},       {"r0", p.r0},
                   {"D", p.D},         {"c0", p.c0},       {"margin", p.margin},
                   {"T", p.T},         {"q_max", p.q_max}, {"beta", p.beta()},
                   {"ln_c_R", p.ln_c_R()}, {"ln_L", p.ln_L()}, {"ln_C_L", p.ln_C_L()}};
    j["ln_a"] = rep.ln_a;
    j["log2_a"] = rep.ln_a / std::log(2.0);
    j["pass"] = rep.pass;
    for (const auto& r : rep.rows)
        j["constraints"].push_back(
            {{"name", r.name}, {"q", r.q}, {"log_slack", r.log_slack}, {"pass", r.pass}});
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_min_a_json(const LedgerParams& p, const MinAResult& res,
                      const std::vector<std::pair<double, double>>& c0_sensitivity,
                      const std::filesystem::path& path) {
    nlohmann::json j;
    j["satisfiable"] = res.satisfiable;
    j["log2_a"] = res.log2_a;
    if (res.a_exact) j["a"] = *res.a_exact;
    j["binding_constraint"] = res.binding_constraint;
    j["margin"] = p.margin;
    j["c0"] = p.c0;
    j["n0"] = p.n0;
    j["monotone_bracket_ok"] = res.monotone_bracket_ok;
    for (const auto& [c0, log2a] : c0_sensitivity)
        j["c0_sensitivity"].push_back({{"c0", c0}, {"log2_a", log2a}});
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace forge
