#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "field.hpp"
#include "gmc.hpp"

namespace gmclab {

struct GoodEventConfig {
    double gamma_hat = 0.0;  // threshold slope, > 0
    int n0 = 1;              // coarsest scale index (delta = e^{-n0})
    int n_fine = 1;          // finest scale index N (eps = e^{-N})

    void validate() const;
    static double default_gamma_hat(double gamma, int d);
};

// representative of x in the lattice e^{-n} Z^d with half-open cells
// x + e^{-n}/2 [-1,1)^d; per coordinate: e^{-n} floor(x e^n + 1/2)
void cell_rep(const double* x, int dim, int n, double* out);

// Truncated fields X_n at integer depths n0..N, as prefix sums of the
// sample's bands, evaluated at lattice representatives snapped to the
// nearest grid site.
class ScaleFields {
public:
    ScaleFields(const FieldSample& sample, int n0, int n_fine);

    // X_n at the representative of site `site` on scale n
    double at_rep(int n, std::size_t site) const;
    // smallest n in [n0, N] with X_n(x_n) > gamma_hat n, or nullopt
    std::optional<int> first_failure(std::size_t site, double gamma_hat) const;

    int n0() const { return n0_; }
    int n_fine() const { return n_fine_; }

private:
    GridSpec grid_;
    int n0_, n_fine_;
    std::vector<Field> cumulative_;            // X_n grids, n = n0..N
    std::vector<std::vector<std::uint32_t>> rep_site_;  // [n-n0][site] -> rep site
};

std::optional<int> first_failure_scale(const FieldSample& sample, const double* x,
                                       const GoodEventConfig& cfg);

struct SplitResult {
    cplx good;
    cplx bad;
    cplx total;  // same exact summation path as estimate_I, so bit-identical to it
    std::size_t n_good = 0;
    std::size_t n_bad = 0;
};

// I(f,k) split by the good event G = {first failure = none}; the field is
// the sample truncated at depth N with matched band variance.
SplitResult split_good_bad(const TestFunction& f, const FieldSample& sample, int k, cplx gamma,
                           const GoodEventConfig& cfg);

// max over grid sites of X_t(x)/t; requires t > 0
double thickness_max(const FieldSample& sample, double t);

struct McStat {
    double estimate;
    double std_error;
};

// T^{k/2} E[He_k(B_T/sqrt(T)) 1{B_t <= t for t = 0..T}] for integer-time
// standard Brownian motion, by Monte Carlo.
McStat toy_martingale_stat(int k, int T, long replicas, std::uint64_t seed);

}  // namespace gmclab
