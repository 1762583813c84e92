#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace gmclab {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

FftGrid::FftGrid(int dim, int m) : dim_(dim), m_(m) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("FftGrid: dim must be 1 or 2");
    if (m < 2) throw std::invalid_argument("FftGrid: grid too small");
    n_ = (dim == 1) ? std::size_t(m) : std::size_t(m) * m;
    scratch_.resize(n_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch_.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim == 1) {
        fwd_ = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft_1d(m, buf, buf, FFTW_BACKWARD, flags);
    } else {
        fwd_ = fftw_plan_dft_2d(m, m, buf, buf, FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft_2d(m, m, buf, buf, FFTW_BACKWARD, flags);
    }
    if (!fwd_ || !bwd_) throw std::runtime_error("FftGrid: fftw plan creation failed");
}

FftGrid::~FftGrid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void FftGrid::forward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void FftGrid::backward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

}  // namespace gmclab
