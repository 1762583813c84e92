#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kernels.hpp"

namespace gmclab {

struct GridSpec {
    int dim = 1;  // 1 or 2
    int m = 64;   // points per dim, power of two, >= 64

    std::size_t size() const { return dim == 1 ? std::size_t(m) : std::size_t(m) * m; }
    double spacing() const { return 1.0 / m; }
    double cell_volume() const { return dim == 1 ? 1.0 / m : 1.0 / (double(m) * m); }
    void validate() const;

    // torus distance between grid sites i and j (flat indices)
    double site_distance(std::size_t i, std::size_t j) const;
    // coordinates of a flat site index in [0,1)^d
    void site_coords(std::size_t i, double* xy) const;
    // flat index of the grid site nearest to a torus point
    std::size_t nearest_site(const double* xy) const;
};

struct BandSpec {
    double u_center;
    double delta_u;
    double weight;  // 1 - a e^{-alpha u_center}
};

using Field = std::vector<double>;

// One realization of the layered field, decomposed by scale band. Bands
// tile (0, t_max] with width delta_u; band j is an independent stationary
// Gaussian layer with covariance K(e^{u_j}(x-y)) weight_j delta_u between
// grid sites (torus distances), synthesized by circulant spectral
// factorization, tiny negative eigenvalues clipped and recorded.
struct FieldSample {
    GridSpec grid;
    FieldParams params;
    double t_max = 0.0;
    double delta_u = 0.25;
    std::uint64_t rng_seed = 0;
    std::vector<BandSpec> band_specs;
    std::vector<Field> bands;
    double psd_clip_mass = 0.0;   // clipped variance per site, all bands
    double total_variance = 0.0;  // band-sum variance at full depth

    // sum of bands with u_center < t
    Field truncated(double t) const;
    // band-sum variance of the truncated field at depth t (exact in law)
    double band_variance(double t) const;
};

FieldSample sample_field(const FieldParams& params, const GridSpec& grid, double t_max,
                         double delta_u, std::uint64_t seed);

// Covariance of the sampled (banded) field between sites at torus
// distance r, depths t1 and t2: sum over bands below min(t1,t2) of
// K(e^{u_c} r) weight delta_u. This is the exact covariance realized by
// sample_field (up to PSD clipping), used as the matched oracle.
double band_cov(const FieldParams& params, double t_max, double delta_u, double t1, double t2,
                double r);

struct RegSelector {
    enum Kind { truncated, mollified, truncated_mollified } kind = truncated;
    double t = 0.0;    // truncation depth
    double eps = 0.0;  // mollification scale
};

// X_t, X_eps = X_{t_max} * phi_eps, or X_{t,eps}; mollification is a
// periodic convolution evaluated spectrally with the gridded mollifier
// normalized to unit discrete mass.
Field field_at(const FieldSample& sample, const RegSelector& reg, const Mollifier& mollifier);

struct CovEstimate {
    double estimate;
    double std_error;  // jackknife
};

// Unbiased sample covariance with jackknife standard errors, one entry
// per (site, site) pair. Requires >= 100 replicas.
std::vector<CovEstimate> empirical_cov(const std::vector<Field>& replicas,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Covariance defect of the exact-in-law rescaling identity
//   C_t^a at separation r0*r  ==  C_{t-t0}^{a r0^alpha} at r  +  C_{t0}^a at r0*r,
// all three sides by cov_star quadrature; returns the max |defect| over
// the given separations. t0 must be a multiple of delta_u.
double scaling_check(const FieldParams& params, double t0, double t,
                     const std::vector<double>& separations, double delta_u);

// flat binary snapshot (header: dim, M, t_max, seed; payload row-major
// doubles) and CSV for small grids
void export_field_bin(const FieldSample& sample, const Field& values, const std::string& path);
void export_field_csv(const GridSpec& grid, const Field& values, const std::string& path);

}  // namespace gmclab
