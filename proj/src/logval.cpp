#include "forge/logval.hpp"

#include <algorithm>
#include <limits>

namespace forge {

double log_sum_exp(const std::vector<double>& logs) {
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace forge
