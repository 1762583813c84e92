#pragma once

#include <complex>
#include <vector>

namespace gmclab {

// In-place complex FFT on an M^dim grid (dim 1 or 2), row-major.
// Unnormalized transforms, FFTW conventions: backward(forward(x)) = M^dim x.
// Plan creation is serialized internally; execution on distinct buffers is
// safe from multiple threads.
class FftGrid {
public:
    FftGrid(int dim, int m);
    ~FftGrid();
    FftGrid(const FftGrid&) = delete;
    FftGrid& operator=(const FftGrid&) = delete;

    void forward(std::complex<double>* data) const;
    void backward(std::complex<double>* data) const;

    int dim() const { return dim_; }
    int m() const { return m_; }
    std::size_t size() const { return n_; }

private:
    int dim_;
    int m_;
    std::size_t n_;
    void* fwd_;
    void* bwd_;
    std::vector<std::complex<double>> scratch_;
};

}  // namespace gmclab
