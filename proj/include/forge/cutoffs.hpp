#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace forge {

// Square partition of unity chi_j(t) = chi(mu t - j) built from the
// standard bump psi in C_c^inf((-3/4, 3/4)): chi^2(s) = psi(s) / sum_l
// psi(s - l). At most two cutoffs overlap at any time and
// sum_j chi_j^2 = 1 on [0, L].
struct CutoffFamily {
    double mu = 1.0;
    double L = 1.0;
    int j_max = 0;  // j ranges over 0..j_max

    CutoffFamily() = default;
    CutoffFamily(double mu_, double L_) : mu(mu_), L(L_) {
        if (mu <= 0.0 || L <= 0.0) throw std::invalid_argument("CutoffFamily: mu, L > 0 required");
        j_max = int(std::ceil(L * mu));
    }

    static double bump(double s) {
        const double w = 0.75;
        if (std::abs(s) >= w) return 0.0;
        const double r = s / w;
        return std::exp(-1.0 / (1.0 - r * r));
    }
    static double chi_unit(double s) {
        const double num = bump(s);
        if (num == 0.0) return 0.0;
        const double den = bump(s - 1.0) + num + bump(s + 1.0);
        return std::sqrt(num / den);
    }

    double chi(int j, double t) const { return chi_unit(mu * t - j); }
    double anchor(int j) const { return j / mu; }
    bool active(int j, double t) const { return std::abs(mu * t - j) < 0.75; }
    // cutoff indices with chi_j(t) != 0, at most two
    std::vector<int> active_set(double t) const {
        std::vector<int> out;
        const double s = mu * t;
        const int lo = std::max(0, int(std::ceil(s - 0.75)));
        const int hi = std::min(j_max, int(std::floor(s + 0.75)));
        for (int j = lo; j <= hi; ++j)
            if (active(j, t)) out.push_back(j);
        return out;
    }
};

}  // namespace forge
