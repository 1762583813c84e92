#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fft.hpp"

namespace gmclab {

namespace {

// smooth bump, support (-1,1)
double bump(double s) {
    double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s2));
}

struct GaussLegendre {
    std::vector<double> x, w;  // nodes/weights on [-1,1]
    explicit GaussLegendre(int n) {
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                double z1 = z;
                z = z1 - p0 / pp;
                if (std::abs(z - z1) < 1e-15) break;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
    }
    template <class F>
    double integrate(F f, double a, double b) const {
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(mid + half * x[i]);
        return s * half;
    }
};

const GaussLegendre& gl80() {
    static const GaussLegendre g(80);
    return g;
}

// unnormalized radial convolution (phi*phi)(r e1) with phi = bump(2|x|)
double conv_raw_1d(double r) {
    double lo = r - 0.5, hi = 0.5;
    if (lo >= hi) return 0.0;
    return gl80().integrate(
        [r](double y) { return bump(2.0 * y) * bump(2.0 * (y - r)); }, lo, hi);
}

double conv_raw_2d(double r) {
    double lo = r - 0.5, hi = 0.5;
    if (lo >= hi) return 0.0;
    const auto& g = gl80();
    return g.integrate(
        [&](double y1) {
            double h2 = std::min(0.25 - y1 * y1, 0.25 - (y1 - r) * (y1 - r));
            if (h2 <= 0.0) return 0.0;
            double h = std::sqrt(h2);
            return 2.0 * g.integrate(
                             [&](double y2) {
                                 double a = std::sqrt(y1 * y1 + y2 * y2);
                                 double b = std::sqrt((y1 - r) * (y1 - r) + y2 * y2);
                                 return bump(2.0 * a) * bump(2.0 * b);
                             },
                             0.0, h);
        },
        lo, hi);
}

double interp_radial(const std::vector<double>& table, int resolution, double r) {
    if (r >= 1.0) return 0.0;
    if (r < 0.0) r = -r;
    double pos = r * resolution;
    int j = std::min(int(pos), resolution - 1);
    double frac = pos - j;
    return table[j] * (1.0 - frac) + table[j + 1] * frac;
}

}  // namespace

SeedKernel SeedKernel::build(int dim, int resolution) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("SeedKernel: dim must be 1 or 2");
    if (resolution < 256) throw std::invalid_argument("SeedKernel: resolution must be >= 256");

    SeedKernel k;
    k.dim_ = dim;
    k.resolution_ = resolution;
    k.table_.resize(resolution + 1);
    for (int i = 0; i <= resolution; ++i) {
        double r = double(i) / resolution;
        k.table_[i] = (dim == 1) ? conv_raw_1d(r) : conv_raw_2d(r);
    }
    // normalize so that K(0) = 1 exactly; this is the L2 normalization of
    // phi evaluated with the same quadrature rule
    double k0 = k.table_[0];
    if (!(k0 > 0.0)) throw std::runtime_error("SeedKernel: degenerate convolution table");
    for (double& v : k.table_) v /= k0;
    for (double v : k.table_)
        if (v < 0.0) throw std::runtime_error("SeedKernel: negative table value");

    // spectral diagnostic: DFT of the tabulated kernel on [-2,2)^d
    if (dim == 1) {
        int n = 4 * resolution;  // spacing 1/resolution, node-aligned
        double h = 1.0 / resolution;
        std::vector<std::complex<double>> buf(n);
        for (int i = 0; i < n; ++i) {
            double xo = i * h;
            double r = std::min(xo, 4.0 - xo);
            buf[i] = k.value(r);
        }
        FftGrid fft(1, n);
        fft.forward(buf.data());
        double mn = buf[0].real();
        for (auto& c : buf) mn = std::min(mn, c.real());
        k.spectral_min_ = mn * h;
    } else {
        int n = 1024;
        double h = 4.0 / n;
        std::vector<std::complex<double>> buf(std::size_t(n) * n);
        for (int i = 0; i < n; ++i) {
            double xo = std::min(i * h, 4.0 - i * h);
            for (int j = 0; j < n; ++j) {
                double yo = std::min(j * h, 4.0 - j * h);
                buf[std::size_t(i) * n + j] = k.value(std::sqrt(xo * xo + yo * yo));
            }
        }
        FftGrid fft(2, n);
        fft.forward(buf.data());
        double mn = buf[0].real();
        for (auto& c : buf) mn = std::min(mn, c.real());
        k.spectral_min_ = mn * h * h;
    }
    if (k.spectral_min_ < -1e-6)
        throw std::runtime_error("SeedKernel: spectral diagnostic failed (quadrature misconfiguration)");
    return k;
}

double SeedKernel::value(double r) const {
    return interp_radial(table_, resolution_, r);
}

void SeedKernel::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("SeedKernel: cannot open " + path);
    out << "r,value\n";
    char line[64];
    for (int i = 0; i <= resolution_; ++i) {
        std::snprintf(line, sizeof line, "%.12g,%.12g\n", double(i) / resolution_, table_[i]);
        out << line;
    }
}

Mollifier Mollifier::build(int dim, int resolution) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Mollifier: dim must be 1 or 2");
    if (resolution < 256) throw std::invalid_argument("Mollifier: resolution must be >= 256");
    Mollifier m;
    m.dim_ = dim;
    m.resolution_ = resolution;
    m.table_.resize(resolution + 1);
    double mass;
    if (dim == 1) {
        mass = 2.0 * gl80().integrate([](double s) { return bump(s); }, 0.0, 1.0);
    } else {
        mass = 2.0 * M_PI * gl80().integrate([](double s) { return bump(s) * s; }, 0.0, 1.0);
    }
    for (int i = 0; i <= resolution; ++i)
        m.table_[i] = bump(double(i) / resolution) / mass;
    return m;
}

double Mollifier::value(double r) const {
    return interp_radial(table_, resolution_, r);
}

void Mollifier::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Mollifier: cannot open " + path);
    out << "r,value\n";
    char line[64];
    for (int i = 0; i <= resolution_; ++i) {
        std::snprintf(line, sizeof line, "%.12g,%.12g\n", double(i) / resolution_, table_[i]);
        out << line;
    }
}

void FieldParams::validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("FieldParams: dim must be 1 or 2");
    if (!(alpha > 0.0)) throw std::invalid_argument("FieldParams: alpha must be positive");
    if (!(frak_a >= 0.0 && frak_a <= 1.0))
        throw std::invalid_argument("FieldParams: frak_a must lie in [0,1]");
    if (!seed) throw std::invalid_argument("FieldParams: missing seed kernel");
    if (seed->dim() != dim) throw std::invalid_argument("FieldParams: seed kernel dimension mismatch");
}

double sigma_sq(const FieldParams& params, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("sigma_sq: t must be nonnegative");
    if (params.frak_a == 0.0) return t;
    return t + params.frak_a * std::expm1(-params.alpha * t) / params.alpha;
}

double cov_star(const FieldParams& params, double s, double t, double r) {
    params.validate();
    if (!(r >= 0.0)) throw std::invalid_argument("cov_star: r must be nonnegative");
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("cov_star: s, t must be nonnegative");
    double upper = std::min(s, t);
    if (upper <= 0.0) return 0.0;
    if (r == 0.0) {
        if (!std::isfinite(upper))
            throw std::invalid_argument("cov_star: infinite depth at zero separation diverges");
        return sigma_sq(params, upper);  // K(0) = 1 exactly by normalization
    }
    const SeedKernel& K = *params.seed;
    const int res = K.resolution();
    const double a = params.frak_a;
    const double alpha = params.alpha;
    double cap = std::log(1.0 / r);
    if (cap <= 0.0) return 0.0;
    double U = std::min(upper, cap);

    // K(e^u r) is linear in v = e^u r within each table cell; each piece
    // (A + B e^u)(1 - a e^{-alpha u}) integrates in closed form.
    double total = 0.0;
    double u_lo = 0.0;
    int j = std::min(int(r * res), res - 1);
    while (u_lo < U) {
        double v_hi = double(j + 1) / res;
        double u_hi = std::min(U, std::log(v_hi / r));
        if (u_hi > u_lo) {
            double slope = (K.table()[j + 1] - K.table()[j]) * res;
            double A = K.table()[j] - (double(j) / res) * slope;
            double B = slope * r;
            double e_lo = std::exp(u_lo), e_hi = std::exp(u_hi);
            double piece = A * (u_hi - u_lo) + B * (e_hi - e_lo);
            if (a != 0.0) {
                piece -= a * A * (std::exp(-alpha * u_lo) - std::exp(-alpha * u_hi)) / alpha;
                if (std::abs(1.0 - alpha) < 1e-12) {
                    piece -= a * B * (u_hi - u_lo);
                } else {
                    piece -= a * B *
                             (std::exp((1.0 - alpha) * u_hi) - std::exp((1.0 - alpha) * u_lo)) /
                             (1.0 - alpha);
                }
            }
            total += piece;
            u_lo = u_hi;
        }
        if (++j >= res) break;
    }
    return total;
}

namespace {
std::mutex cache_mutex;
std::map<std::pair<int, int>, std::shared_ptr<const SeedKernel>> seed_cache;
std::map<std::pair<int, int>, std::shared_ptr<const Mollifier>> mollifier_cache;
}  // namespace

std::shared_ptr<const SeedKernel> shared_seed_kernel(int dim, int resolution) {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(dim, resolution);
    auto it = seed_cache.find(key);
    if (it != seed_cache.end()) return it->second;
    auto k = std::make_shared<const SeedKernel>(SeedKernel::build(dim, resolution));
    seed_cache[key] = k;
    return k;
}

std::shared_ptr<const Mollifier> shared_mollifier(int dim, int resolution) {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(dim, resolution);
    auto it = mollifier_cache.find(key);
    if (it != mollifier_cache.end()) return it->second;
    auto m = std::make_shared<const Mollifier>(Mollifier::build(dim, resolution));
    mollifier_cache[key] = m;
    return m;
}

}  // namespace gmclab
