#include "field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fft.hpp"
#include "rng.hpp"
#include "summation.hpp"

namespace gmclab {

void GridSpec::validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
    if (m < 64) throw std::invalid_argument("GridSpec: need at least 64 points per dim");
    if ((m & (m - 1)) != 0) throw std::invalid_argument("GridSpec: points per dim must be a power of two");
}

double GridSpec::site_distance(std::size_t i, std::size_t j) const {
    auto axis = [this](int a, int b) {
        int d = std::abs(a - b);
        return double(std::min(d, m - d)) / m;
    };
    if (dim == 1) return axis(int(i), int(j));
    double dx = axis(int(i / m), int(j / m));
    double dy = axis(int(i % m), int(j % m));
    return std::sqrt(dx * dx + dy * dy);
}

void GridSpec::site_coords(std::size_t i, double* xy) const {
    if (dim == 1) {
        xy[0] = double(i) / m;
    } else {
        xy[0] = double(i / m) / m;
        xy[1] = double(i % m) / m;
    }
}

std::size_t GridSpec::nearest_site(const double* xy) const {
    auto snap = [this](double x) {
        x -= std::floor(x);  // torus wrap
        long idx = std::lround(x * m);
        return std::size_t(((idx % m) + m) % m);
    };
    if (dim == 1) return snap(xy[0]);
    return snap(xy[0]) * m + snap(xy[1]);
}

namespace {

// torus distance of flat index j from the origin site
double offset_distance(const GridSpec& g, std::size_t j) {
    if (g.dim == 1) {
        double d = double(std::min<std::size_t>(j, g.m - j)) / g.m;
        return d;
    }
    std::size_t a = j / g.m, b = j % g.m;
    double dx = double(std::min<std::size_t>(a, g.m - a)) / g.m;
    double dy = double(std::min<std::size_t>(b, g.m - b)) / g.m;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

FieldSample sample_field(const FieldParams& params, const GridSpec& grid, double t_max,
                         double delta_u, std::uint64_t seed) {
    params.validate();
    grid.validate();
    if (!(delta_u > 0.0 && delta_u <= 0.5))
        throw std::invalid_argument("sample_field: delta_u must lie in (0, 0.5]");
    if (!(t_max >= 0.0)) throw std::invalid_argument("sample_field: t_max must be nonnegative");
    double nb_real = t_max / delta_u;
    long nb = std::lround(nb_real);
    if (std::abs(nb_real - double(nb)) > 1e-9)
        throw std::invalid_argument("sample_field: t_max must be a multiple of delta_u");

    FieldSample s;
    s.grid = grid;
    s.params = params;
    s.t_max = t_max;
    s.delta_u = delta_u;
    s.rng_seed = seed;

    const std::size_t n = grid.size();
    const SeedKernel& K = *params.seed;
    Rng rng(seed, 0);
    FftGrid fft(grid.dim, grid.m);
    std::vector<std::complex<double>> buf(n);
    std::vector<double> lambda(n);

    for (long b = 0; b < nb; ++b) {
        double u = (b + 0.5) * delta_u;
        double weight = 1.0 - params.frak_a * std::exp(-params.alpha * u);
        double var = weight * delta_u;
        s.band_specs.push_back({u, delta_u, weight});
        s.total_variance += var;
        Field layer(n);
        double scale = std::exp(u);
        if (std::exp(-u) < grid.spacing()) {
            // kernel support below one grid cell: independent per-site noise
            double sd = std::sqrt(var);
            for (std::size_t i = 0; i < n; ++i) layer[i] = sd * rng.next_normal();
        } else {
            for (std::size_t i = 0; i < n; ++i)
                buf[i] = var * K.value(scale * offset_distance(grid, i));
            fft.forward(buf.data());
            double clipped = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double lam = buf[i].real();
                if (lam < 0.0) {
                    clipped -= lam;
                    lam = 0.0;
                }
                lambda[i] = std::sqrt(lam);
            }
            s.psd_clip_mass += clipped / double(n);
            for (std::size_t i = 0; i < n; ++i) buf[i] = rng.next_normal();
            fft.forward(buf.data());
            for (std::size_t i = 0; i < n; ++i) buf[i] *= lambda[i];
            fft.backward(buf.data());
            double norm = 1.0 / double(n);
            for (std::size_t i = 0; i < n; ++i) layer[i] = buf[i].real() * norm;
        }
        s.bands.push_back(std::move(layer));
    }
    if (s.total_variance > 0.0 && s.psd_clip_mass > 1e-6 * s.total_variance)
        throw std::runtime_error("sample_field: PSD clip mass over budget (resolution/band mismatch)");
    return s;
}

double band_cov(const FieldParams& params, double t_max, double delta_u, double t1, double t2,
                double r) {
    double t = std::min({t1, t2, t_max});
    double acc = 0.0;
    long nb = std::lround(t_max / delta_u);
    for (long b = 0; b < nb; ++b) {
        double u = (b + 0.5) * delta_u;
        if (u >= t) break;
        double weight = 1.0 - params.frak_a * std::exp(-params.alpha * u);
        acc += params.seed->value(std::exp(u) * r) * weight * delta_u;
    }
    return acc;
}

Field FieldSample::truncated(double t) const {
    Field out(grid.size(), 0.0);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (band_specs[b].u_center >= t) break;
        const Field& layer = bands[b];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer[i];
    }
    return out;
}

double FieldSample::band_variance(double t) const {
    double acc = 0.0;
    for (const auto& b : band_specs) {
        if (b.u_center >= t) break;
        acc += b.weight * b.delta_u;
    }
    return acc;
}

namespace {

Field mollify(const GridSpec& grid, const Field& input, double eps, const Mollifier& mol) {
    const std::size_t n = grid.size();
    std::vector<std::complex<double>> f(n), phi(n);
    double epsd = (grid.dim == 1) ? eps : eps * eps;
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = input[i];
        phi[i] = mol.value(offset_distance(grid, i) / eps) / epsd;
    }
    // normalize the gridded mollifier to unit discrete mass so the
    // convolution preserves the spatial mean exactly
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += phi[i].real();
    mass *= grid.cell_volume();
    if (!(mass > 0.0)) throw std::runtime_error("mollify: empty gridded mollifier");
    FftGrid fft(grid.dim, grid.m);
    fft.forward(f.data());
    fft.forward(phi.data());
    double norm = grid.cell_volume() / (mass * double(n));
    for (std::size_t i = 0; i < n; ++i) f[i] *= phi[i] * norm;
    fft.backward(f.data());
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f[i].real();
    return out;
}

}  // namespace

Field field_at(const FieldSample& sample, const RegSelector& reg, const Mollifier& mollifier) {
    switch (reg.kind) {
        case RegSelector::truncated:
            if (reg.t > sample.t_max + 1e-12)
                throw std::invalid_argument("field_at: truncation depth beyond sample t_max");
            return sample.truncated(reg.t);
        case RegSelector::mollified:
            if (reg.eps < 4.0 * sample.grid.spacing())
                throw std::invalid_argument("field_at: eps below 4 grid spacings");
            return mollify(sample.grid, sample.truncated(sample.t_max + 1.0), reg.eps, mollifier);
        case RegSelector::truncated_mollified:
            if (reg.t > sample.t_max + 1e-12)
                throw std::invalid_argument("field_at: truncation depth beyond sample t_max");
            if (reg.eps < 4.0 * sample.grid.spacing())
                throw std::invalid_argument("field_at: eps below 4 grid spacings");
            return mollify(sample.grid, sample.truncated(reg.t), reg.eps, mollifier);
    }
    throw std::logic_error("field_at: unknown regularization");
}

std::vector<CovEstimate> empirical_cov(const std::vector<Field>& replicas,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    const std::size_t R = replicas.size();
    if (R < 100) throw std::invalid_argument("empirical_cov: need at least 100 replicas");
    std::vector<CovEstimate> out;
    out.reserve(pairs.size());
    std::vector<double> xs(R), ys(R);
    for (auto [i, j] : pairs) {
        double sx = 0, sy = 0, sxy = 0;
        for (std::size_t r = 0; r < R; ++r) {
            xs[r] = replicas[r][i];
            ys[r] = replicas[r][j];
            sx += xs[r];
            sy += ys[r];
            sxy += xs[r] * ys[r];
        }
        double n = double(R);
        double cov = (sxy - sx * sy / n) / (n - 1.0);
        // leave-one-out jackknife
        double mean_theta = 0.0;
        std::vector<double> theta(R);
        for (std::size_t r = 0; r < R; ++r) {
            double sx_r = sx - xs[r], sy_r = sy - ys[r], sxy_r = sxy - xs[r] * ys[r];
            theta[r] = (sxy_r - sx_r * sy_r / (n - 1.0)) / (n - 2.0);
            mean_theta += theta[r];
        }
        mean_theta /= n;
        double ss = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            double d = theta[r] - mean_theta;
            ss += d * d;
        }
        double se = std::sqrt((n - 1.0) / n * ss);
        out.push_back({cov, se});
    }
    return out;
}

double scaling_check(const FieldParams& params, double t0, double t,
                     const std::vector<double>& separations, double delta_u) {
    if (!(t >= t0))
        throw std::invalid_argument("scaling_check: t must be >= t0");
    double steps = t0 / delta_u;
    if (std::abs(steps - std::lround(steps)) > 1e-9)
        throw std::invalid_argument("scaling_check: t0 must be a multiple of delta_u (band alignment)");
    double r0 = std::exp(-t0);
    FieldParams rescaled = params;
    rescaled.frak_a = params.frak_a * std::pow(r0, params.alpha);
    double worst = 0.0;
    for (double r : separations) {
        double lhs = cov_star(params, t, t, r0 * r);
        double rhs = cov_star(rescaled, t - t0, t - t0, r) + cov_star(params, t0, t0, r0 * r);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

void export_field_bin(const FieldSample& sample, const Field& values, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_field_bin: cannot open " + path);
    std::int32_t dim = sample.grid.dim, m = sample.grid.m;
    double t_max = sample.t_max;
    std::uint64_t seed = sample.rng_seed;
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(&t_max), sizeof t_max);
    out.write(reinterpret_cast<const char*>(&seed), sizeof seed);
    out.write(reinterpret_cast<const char*>(values.data()),
              std::streamsize(values.size() * sizeof(double)));
}

void export_field_csv(const GridSpec& grid, const Field& values, const std::string& path) {
    if (grid.size() > 65536) throw std::invalid_argument("export_field_csv: grid too large for CSV");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_field_csv: cannot open " + path);
    char line[96];
    if (grid.dim == 1) {
        out << "x,value\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(line, sizeof line, "%.12g,%.12g\n", double(i) / grid.m, values[i]);
            out << line;
        }
    } else {
        out << "x,y,value\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", double(i / grid.m) / grid.m,
                          double(i % grid.m) / grid.m, values[i]);
            out << line;
        }
    }
}

}  // namespace gmclab
