#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "field.hpp"
#include "hermite.hpp"

namespace gmclab {

// Bounded test function on the grid, vanishing outside its support box
// (same interval on every axis).
struct TestFunction {
    GridSpec grid;
    Field values;
    double support_lo = 0.0;
    double support_hi = 1.0;
    double sup_norm = 0.0;

    // integral against the grid measure (cell volume x sum)
    double integral() const;
    double abs_integral() const;

    // smooth plateau supported exactly on [lo,hi]^d, equal to 1 on
    // [lo+width, hi-width]^d
    static TestFunction smoothed_indicator(const GridSpec& grid, double lo, double hi,
                                           double width);
    static TestFunction constant(const GridSpec& grid, double value);
};

struct GmcEstimate {
    cplx value;
    int k = 0;
    cplx gamma;
    double epsilon = 0.0;
    std::string reg;
    std::uint64_t seed = 0;
};

// :X^k e^{gamma X}: evaluated pointwise on the grid with Var = sigma_eps^2
std::vector<cplx> wick_field_grid(const Field& x, int k, cplx gamma, double sigma_eps);
std::vector<double> wick_field_grid(const Field& x, int k, double gamma, double sigma_eps);

// I(f,k) = cell_volume * sum_i f_i :X_i^k e^{gamma X_i}:, accumulated with
// exact partials so the value is the correctly rounded grid sum.
cplx estimate_I(const TestFunction& f, const Field& x, int k, cplx gamma, double sigma_eps);
double estimate_I(const TestFunction& f, const Field& x, int k, double gamma, double sigma_eps);

// all of I(f,0..k_max) in one sweep (real gamma)
std::vector<double> estimate_I_all_k(const TestFunction& f, const Field& x, int k_max,
                                     double gamma, double sigma_eps);

// deterministic moment oracles on the grid measure; cov evaluates the
// matched covariance at a torus separation
double moment_oracle_mean(const TestFunction& f, int k);
cplx moment_oracle_pair(const TestFunction& f, int j, int k, cplx g1, cplx g2,
                        const std::function<double(double)>& cov);
double moment_oracle_complex_l2(const TestFunction& f, cplx gamma_prime,
                                const std::function<double(double)>& cov);

// Eye = union over gamma in (-sqrt(2d), sqrt(2d)) of open discs
// |g' - gamma| < sqrt(d) - |gamma|/sqrt(2); equivalently the open convex
// hull of that interval and the disc of radius sqrt(d): with x = |Re|,
// y = |Im|, membership is x + y < sqrt(2d) and additionally x^2 + y^2 < d
// on the cap |x| <= sqrt(d/2) where the disc arc is the boundary.
bool eye_contains(cplx point, int d);
double disc_radius(double gamma, int d);

struct SeriesResult {
    cplx value;
    int k_used;
};

// sum_k (g'-g)^k/k! I(f,k,g), stopping once three consecutive increments
// fall below tol * |partial sum|; caps double from 16 up to 1024.
SeriesResult series_eval(const TestFunction& f, const Field& x, double gamma, cplx gamma_prime,
                         double tol, double sigma_eps);

// direct evaluation of the complex Wick exponential integral
cplx direct_complex(const TestFunction& f, const Field& x, cplx gamma_prime, double sigma_eps);

// E|I(f,k)| normalized by k! ((1+eta) sqrt(2)/(sqrt(2d)-|gamma|))^k ||f||_inf
double growth_normalizer(int k, double gamma, int d, double eta);

}  // namespace gmclab
