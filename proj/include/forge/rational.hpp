#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace forge {

// Exact rational on int64 with overflow-checked arithmetic (products pass
// through __int128). Enough for the wave-frame algebra (denominators stay
// tiny) and for the ledger's exponent coefficients (b^q up to q ~ 12).
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    static long long check(__int128 v) {
        if (v > __int128(INT64_MAX) || v < __int128(INT64_MIN))
            throw std::overflow_error("Rat: int64 overflow");
        return (long long)v;
    }
    static Rat make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        Rat r;
        r.num = check(n);
        r.den = check(d);
        return r;
    }

    Rat operator+(const Rat& o) const {
        return make(__int128(num) * o.den + __int128(o.num) * den, __int128(den) * o.den);
    }
    Rat operator-(const Rat& o) const {
        return make(__int128(num) * o.den - __int128(o.num) * den, __int128(den) * o.den);
    }
    Rat operator*(const Rat& o) const { return make(__int128(num) * o.num, __int128(den) * o.den); }
    Rat operator/(const Rat& o) const {
        if (o.num == 0) throw std::domain_error("Rat: divide by zero");
        return make(__int128(num) * o.den, __int128(den) * o.num);
    }
    Rat operator-() const { return Rat(-num, den); }
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const { return __int128(num) * o.den < __int128(o.num) * den; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool is_zero() const { return num == 0; }
    double to_double() const { return double(num) / double(den); }
    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    // exact square root; throws unless num and den are perfect squares
    Rat sqrt_exact() const;
};

}  // namespace forge
