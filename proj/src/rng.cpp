#include "forge/rng.hpp"

#include <cmath>

#include "forge/grid.hpp"

namespace forge {

namespace {
inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}
}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t key,
                                           const std::array<std::uint32_t, 4>& counter) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    std::uint32_t c0 = counter[0], c1 = counter[1], c2 = counter[2], c3 = counter[3];
    std::uint32_t k0 = std::uint32_t(key), k1 = std::uint32_t(key >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, c0, hi0, lo0);
        mulhilo(M1, c2, hi1, lo1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
        k0 += W0; k1 += W1;
    }
    return {c0, c1, c2, c3};
}

std::array<double, 4> CounterRng::uniform4(std::uint64_t step, std::uint32_t slot) const {
    std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(stream), std::uint32_t(stream >> 32),
        std::uint32_t(step), std::uint32_t((step >> 32) ^ (std::uint64_t(slot) << 8))};
    // fold seed into counter word 3 as well to decorrelate nearby seeds
    ctr[3] ^= std::uint32_t(seed >> 17) * 0x85EBCA6Bu + slot;
    auto b = Philox::block(seed, ctr);
    constexpr double s = 1.0 / 4294967296.0;  // 2^-32
    return {(double(b[0]) + 1.0) * s, (double(b[1]) + 1.0) * s,
            (double(b[2]) + 1.0) * s, (double(b[3]) + 1.0) * s};
}

std::array<double, 2> CounterRng::normal2(std::uint64_t step, std::uint32_t slot) const {
    auto u = uniform4(step, slot);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double th = kTwoPi * u[1];
    return {r * std::cos(th), r * std::sin(th)};
}

std::array<double, 4> CounterRng::normal4(std::uint64_t step, std::uint32_t slot) const {
    auto u = uniform4(step, slot);
    const double r0 = std::sqrt(-2.0 * std::log(u[0]));
    const double t0 = kTwoPi * u[1];
    const double r1 = std::sqrt(-2.0 * std::log(u[2]));
    const double t1 = kTwoPi * u[3];
    return {r0 * std::cos(t0), r0 * std::sin(t0), r1 * std::cos(t1), r1 * std::sin(t1)};
}

std::uint64_t mode_stream_id(int kx, int ky, int kz) {
    auto enc = [](int k) { return std::uint64_t(std::uint32_t(k + (1 << 19))) & 0xFFFFFu; };
    return enc(kx) | (enc(ky) << 20) | (enc(kz) << 40);
}

}  // namespace forge
