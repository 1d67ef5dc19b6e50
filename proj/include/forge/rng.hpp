#pragma once

#include <array>
#include <cstdint>

namespace forge {

// Philox-4x32-10 counter-based generator. Draws are a pure function of
// (key, counter), so parallel loops produce identical streams regardless
// of scheduling or thread count.
struct Philox {
    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              const std::array<std::uint32_t, 4>& counter);
};

// One keyed stream: (seed, stream) identify the consumer (e.g. a Fourier
// mode), (step, slot) the draw within it.
struct CounterRng {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    // uniform in (0,1], and standard normal pairs via Box-Muller
    std::array<double, 4> uniform4(std::uint64_t step, std::uint32_t slot) const;
    std::array<double, 2> normal2(std::uint64_t step, std::uint32_t slot) const;
    std::array<double, 4> normal4(std::uint64_t step, std::uint32_t slot) const;
};

// 60-bit grid-independent encoding of a signed wavevector, used as the
// per-mode stream id so refinement and resizing keep streams aligned.
std::uint64_t mode_stream_id(int kx, int ky, int kz);

}  // namespace forge
