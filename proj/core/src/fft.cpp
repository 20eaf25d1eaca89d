#include "ptycho/fft.hpp"

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace ptycho {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
class PlanCache {
public:
    fftw_plan get(std::size_t m, Direction dir) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_pair(m, dir == Direction::Forward);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<cplx> scratch(m * m);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        // The forward kernel carries exp(+i q.r), which is FFTW_BACKWARD.
        const int sign = dir == Direction::Forward ? FFTW_BACKWARD : FFTW_FORWARD;
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void dft2_inplace(std::span<cplx> block, std::size_t m, Direction dir) {
    if (block.size() != m * m) throw ValidationError("dft2: block size does not match m*m");
    if (m == 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(block.data());
    fftw_execute_dft(cache().get(m, dir), buf, buf);
    const double s = 1.0 / static_cast<double>(m);
    for (cplx& v : block) v *= s;
}

ComplexGrid dft2(const ComplexGrid& f, Direction dir) {
    if (f.rows != f.cols) throw ValidationError("dft2: input must be square");
    ComplexGrid out = f;
    dft2_inplace(out.data, f.rows, dir);
    return out;
}

void dft2_frames(FrameStack& z, Direction dir) {
    for (std::size_t k = 0; k < z.frames; ++k) dft2_inplace(z.frame(k), z.side, dir);
}

}  // namespace ptycho
