#pragma once

#include <memory>
#include <string>
#include <vector>

namespace gmclab {

// Tabulated radial seed covariance K = phi * phi where phi is the standard
// smooth bump c exp(-1/(1-(2r)^2)) on r < 1/2, L2-normalized. K(0) = 1,
// K >= 0, support in the unit ball, nonnegative Fourier transform.
class SeedKernel {
public:
    static SeedKernel build(int dim, int resolution);

    // linear interpolation on the radial table; 0 for r >= 1
    double value(double r) const;

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    // smallest discrete Fourier coefficient seen on a fine grid (diagnostic)
    double spectral_min() const { return spectral_min_; }
    const std::vector<double>& table() const { return table_; }

    void export_csv(const std::string& path) const;

private:
    SeedKernel() = default;
    int dim_ = 0;
    int resolution_ = 0;
    double spectral_min_ = 0.0;
    std::vector<double> table_;  // values at r_i = i/resolution, i = 0..resolution
};

// Radial bump profile with unit mass, support in the unit ball.
// phi_eps(x) = eps^{-d} phi(x/eps) is formed by callers.
class Mollifier {
public:
    static Mollifier build(int dim, int resolution);

    double value(double r) const;  // radial profile, 0 for r >= 1

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    const std::vector<double>& table() const { return table_; }

    void export_csv(const std::string& path) const;

private:
    Mollifier() = default;
    int dim_ = 0;
    int resolution_ = 0;
    std::vector<double> table_;
};

struct FieldParams {
    int dim = 1;
    double alpha = 1.0;   // almost-*-scale rate, > 0
    double frak_a = 0.0;  // scaling parameter in [0,1]
    std::shared_ptr<const SeedKernel> seed;

    void validate() const;
};

// C_{s,t}(x,y) = int_0^{min(s,t)} K(e^u |x-y|) (1 - a e^{-alpha u}) du.
// s or t may be +infinity as long as r > 0 (the integrand vanishes for
// u > log(1/r)). The interpolated kernel is integrated cell by cell in
// closed form, so the result is exact up to the tabulation itself.
double cov_star(const FieldParams& params, double s, double t, double r);

// sigma_t^2 = t - a (1 - e^{-alpha t}) / alpha
double sigma_sq(const FieldParams& params, double t);

// Process-wide caches; kernels and mollifiers are immutable once built.
std::shared_ptr<const SeedKernel> shared_seed_kernel(int dim, int resolution);
std::shared_ptr<const Mollifier> shared_mollifier(int dim, int resolution);

}  // namespace gmclab
