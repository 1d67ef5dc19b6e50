#pragma once

#include <cmath>
#include <vector>

#include "forge/rational.hpp"

namespace forge {

// Log-domain scalar: log X = qa * ln(a) + rest. The coefficient on ln(a)
// is an exact rational (the only unbounded direction in the scheme); rest
// collects ln 2, ln pi and the L-dependent constants as a double. Nothing
// is ever exponentiated, so there is no overflow for any a up to 2^(2^20)
// and beyond.
struct LogVal {
    Rat qa{0};
    double rest = 0.0;

    static LogVal value(double v) { return {Rat(0), std::log(v)}; }
    static LogVal a_pow(const Rat& e) { return {e, 0.0}; }
    static LogVal from_log(double lv) { return {Rat(0), lv}; }

    LogVal operator*(const LogVal& o) const { return {qa + o.qa, rest + o.rest}; }
    LogVal operator/(const LogVal& o) const { return {qa - o.qa, rest - o.rest}; }
    LogVal pow(const Rat& e) const { return {qa * e, rest * e.to_double()}; }

    double eval(double ln_a) const { return qa.to_double() * ln_a + rest; }
};

// log(sum of positive terms) given their logs; stable log-sum-exp.
double log_sum_exp(const std::vector<double>& logs);

}  // namespace forge
