#include "forge/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace forge {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex g_plan_mutex;
std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

PlanPair get_plans(int n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    // Dummy buffer only used for planning; FFTW_UNALIGNED lets the plans
    // run on arbitrary std::vector storage via the new-array interface.
    std::int64_t n3 = std::int64_t(n) * n * n;
    fftw_complex* buf = fftw_alloc_complex(n3);
    PlanPair p;
    p.fwd = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache[n] = p;
    return p;
}

}  // namespace

void fft_forward(const TorusGrid& g, std::complex<double>* data) {
    PlanPair p = get_plans(g.n);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    const double s = 1.0 / double(g.n3());
    const std::int64_t n3 = g.n3();
    for (std::int64_t i = 0; i < n3; ++i) data[i] *= s;
}

void fft_backward(const TorusGrid& g, std::complex<double>* data) {
    PlanPair p = get_plans(g.n);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

}  // namespace forge
