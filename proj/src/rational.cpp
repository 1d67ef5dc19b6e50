#include "forge/rational.hpp"

#include <cmath>

namespace forge {

namespace {
long long isqrt_exact(long long v) {
    if (v < 0) throw std::domain_error("Rat::sqrt_exact: negative");
    long long r = (long long)std::llround(std::sqrt((double)v));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    if (r * r != v) throw std::domain_error("Rat::sqrt_exact: not a perfect square");
    return r;
}
}  // namespace

Rat Rat::sqrt_exact() const { return Rat(isqrt_exact(num), isqrt_exact(den)); }

}  // namespace forge
