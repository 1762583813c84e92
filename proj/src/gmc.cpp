#include "gmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fft.hpp"
#include "summation.hpp"

namespace gmclab {

namespace {

// smooth ramp: 0 for y<=0, 1 for y>=1
double smooth_step(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    double a = std::exp(-1.0 / y);
    double b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
}

}  // namespace

double TestFunction::integral() const {
    KahanSum s;
    for (double v : values) s.add(v);
    return s.value() * grid.cell_volume();
}

double TestFunction::abs_integral() const {
    KahanSum s;
    for (double v : values) s.add(std::abs(v));
    return s.value() * grid.cell_volume();
}

TestFunction TestFunction::smoothed_indicator(const GridSpec& grid, double lo, double hi,
                                              double width) {
    grid.validate();
    if (!(lo < hi) || !(width > 0.0) || hi - lo < 2.0 * width)
        throw std::invalid_argument("smoothed_indicator: need lo < hi and width < (hi-lo)/2");
    TestFunction f;
    f.grid = grid;
    f.support_lo = lo;
    f.support_hi = hi;
    f.values.resize(grid.size());
    auto profile = [&](double x) {
        return smooth_step((x - lo) / width) * smooth_step((hi - x) / width);
    };
    double sup = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        double xy[2];
        grid.site_coords(i, xy);
        double v = profile(xy[0]);
        if (grid.dim == 2) v *= profile(xy[1]);
        f.values[i] = v;
        sup = std::max(sup, std::abs(v));
    }
    f.sup_norm = sup;
    return f;
}

TestFunction TestFunction::constant(const GridSpec& grid, double value) {
    grid.validate();
    TestFunction f;
    f.grid = grid;
    f.support_lo = 0.0;
    f.support_hi = 1.0;
    f.values.assign(grid.size(), value);
    f.sup_norm = std::abs(value);
    return f;
}

std::vector<cplx> wick_field_grid(const Field& x, int k, cplx gamma, double sigma_eps) {
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("wick_field_grid: sigma_eps must be positive");
    std::vector<cplx> out(x.size());
    const double s = sigma_eps;
    const cplx shift = gamma * s * s;
    const cplx log_norm = -0.5 * gamma * gamma * s * s;
    const double sk = std::pow(s, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
        cplx arg = (x[i] - shift) / s;
        out[i] = sk * hermite_recurrence(k, arg) * std::exp(gamma * x[i] + log_norm);
    }
    return out;
}

std::vector<double> wick_field_grid(const Field& x, int k, double gamma, double sigma_eps) {
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("wick_field_grid: sigma_eps must be positive");
    std::vector<double> out(x.size());
    const double s = sigma_eps;
    const double shift = gamma * s * s;
    const double log_norm = -0.5 * gamma * gamma * s * s;
    const double sk = std::pow(s, k);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = sk * hermite_recurrence(k, (x[i] - shift) / s) *
                 std::exp(gamma * x[i] + log_norm);
    return out;
}

cplx estimate_I(const TestFunction& f, const Field& x, int k, cplx gamma, double sigma_eps) {
    if (f.values.size() != x.size())
        throw std::invalid_argument("estimate_I: test function and field grids differ");
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("estimate_I: sigma_eps must be positive");
    const double s = sigma_eps;
    const cplx shift = gamma * s * s;
    const cplx log_norm = -0.5 * gamma * gamma * s * s;
    const double sk = std::pow(s, k);
    const double vol = f.grid.cell_volume();
    ExactSum re, im;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (f.values[i] == 0.0) continue;
        cplx w = sk * hermite_recurrence(k, (x[i] - shift) / s) * std::exp(gamma * x[i] + log_norm);
        cplx term = f.values[i] * w * vol;
        re.add(term.real());
        im.add(term.imag());
    }
    return {re.round(), im.round()};
}

double estimate_I(const TestFunction& f, const Field& x, int k, double gamma, double sigma_eps) {
    if (f.values.size() != x.size())
        throw std::invalid_argument("estimate_I: test function and field grids differ");
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("estimate_I: sigma_eps must be positive");
    const double s = sigma_eps;
    const double shift = gamma * s * s;
    const double log_norm = -0.5 * gamma * gamma * s * s;
    const double sk = std::pow(s, k);
    const double vol = f.grid.cell_volume();
    ExactSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (f.values[i] == 0.0) continue;
        double w = sk * hermite_recurrence(k, (x[i] - shift) / s) *
                   std::exp(gamma * x[i] + log_norm);
        acc.add(f.values[i] * w * vol);
    }
    return acc.round();
}

std::vector<double> estimate_I_all_k(const TestFunction& f, const Field& x, int k_max,
                                     double gamma, double sigma_eps) {
    if (f.values.size() != x.size())
        throw std::invalid_argument("estimate_I_all_k: test function and field grids differ");
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("estimate_I_all_k: sigma_eps must be positive");
    const double s = sigma_eps;
    const double shift = gamma * s * s;
    const double log_norm = -0.5 * gamma * gamma * s * s;
    const double vol = f.grid.cell_volume();
    std::vector<KahanSum> acc(k_max + 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (f.values[i] == 0.0) continue;
        double base = f.values[i] * std::exp(gamma * x[i] + log_norm) * vol;
        double arg = (x[i] - shift) / s;
        double hm = 0.0, h = 1.0, sk = 1.0;
        for (int k = 0; k <= k_max; ++k) {
            acc[k].add(base * sk * h);
            double next = arg * h - k * hm;
            hm = h;
            h = next;
            sk *= s;
        }
    }
    std::vector<double> out(k_max + 1);
    for (int k = 0; k <= k_max; ++k) out[k] = acc[k].value();
    return out;
}

double moment_oracle_mean(const TestFunction& f, int k) {
    return k == 0 ? f.integral() : 0.0;
}

namespace {

// f-autocorrelation over torus offsets, computed spectrally
Field autocorrelation(const TestFunction& f) {
    const std::size_t n = f.grid.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = f.values[i];
    FftGrid fft(f.grid.dim, f.grid.m);
    fft.forward(buf.data());
    for (auto& c : buf) c = c * std::conj(c);
    fft.backward(buf.data());
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() / double(n);
    return out;
}

double offset_dist(const GridSpec& g, std::size_t i) {
    if (g.dim == 1) return double(std::min<std::size_t>(i, g.m - i)) / g.m;
    std::size_t a = i / g.m, b = i % g.m;
    double dx = double(std::min<std::size_t>(a, g.m - a)) / g.m;
    double dy = double(std::min<std::size_t>(b, g.m - b)) / g.m;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

cplx moment_oracle_pair(const TestFunction& f, int j, int k, cplx g1, cplx g2,
                        const std::function<double(double)>& cov) {
    if (f.grid.size() > std::size_t(512) * 512)
        throw std::invalid_argument("moment_oracle_pair: grid above 512^2 rejected (cost guard)");
    // stationary covariance: the double grid sum collapses to a sum over
    // torus offsets weighted by the f-autocorrelation
    Field ac = autocorrelation(f);
    const double vol = f.grid.cell_volume();
    ExactSum re, im;
    for (std::size_t off = 0; off < ac.size(); ++off) {
        if (ac[off] == 0.0) continue;
        cplx m = wick_pair_moment(j, k, g1, g2, cov(offset_dist(f.grid, off)), 1e-15);
        cplx term = ac[off] * m * vol * vol;
        re.add(term.real());
        im.add(term.imag());
    }
    return {re.round(), im.round()};
}

double moment_oracle_complex_l2(const TestFunction& f, cplx gamma_prime,
                                const std::function<double(double)>& cov) {
    if (f.grid.size() > std::size_t(512) * 512)
        throw std::invalid_argument("moment_oracle_complex_l2: grid above 512^2 rejected (cost guard)");
    Field ac = autocorrelation(f);
    const double vol = f.grid.cell_volume();
    const double g2 = std::norm(gamma_prime);
    ExactSum acc;
    for (std::size_t off = 0; off < ac.size(); ++off) {
        if (ac[off] == 0.0) continue;
        acc.add(ac[off] * std::exp(g2 * cov(offset_dist(f.grid, off))) * vol * vol);
    }
    return acc.round();
}

bool eye_contains(cplx point, int d) {
    if (d < 1) throw std::invalid_argument("eye_contains: d must be positive");
    double x = std::abs(point.real());
    double y = std::abs(point.imag());
    if (!(x + y < std::sqrt(2.0 * d))) return false;
    if (x * x + y * y < double(d)) return true;
    return x > std::sqrt(0.5 * d);
}

double disc_radius(double gamma, int d) {
    if (d < 1) throw std::invalid_argument("disc_radius: d must be positive");
    if (!(std::abs(gamma) < std::sqrt(2.0 * d)))
        throw std::invalid_argument("disc_radius: |gamma| < sqrt(2d) required");
    return std::sqrt(double(d)) - std::abs(gamma) / std::sqrt(2.0);
}

SeriesResult series_eval(const TestFunction& f, const Field& x, double gamma, cplx gamma_prime,
                         double tol, double sigma_eps) {
    if (f.values.size() != x.size())
        throw std::invalid_argument("series_eval: test function and field grids differ");
    if (!(tol > 0.0)) throw std::invalid_argument("series_eval: tol must be positive");
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("series_eval: sigma_eps must be positive");
    const std::size_t n = x.size();
    const double s = sigma_eps;
    const double shift = gamma * s * s;
    const double vol = f.grid.cell_volume();

    // per-site base factor f e^{gamma x - gamma^2 s^2/2} vol and rolling
    // Hermite pair in the shifted argument
    const double log_norm = -0.5 * gamma * gamma * s * s;
    std::vector<double> base(n), arg(n), hm(n, 0.0), h(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = f.values[i] * std::exp(gamma * x[i] + log_norm) * vol;
        arg[i] = (x[i] - shift) / s;
    }

    const cplx step = gamma_prime - cplx(gamma);
    cplx coef = 1.0;  // (g'-g)^k sigma^k / k!
    cplx partial = 0.0;
    int consecutive_small = 0;
    int k = 0;
    for (int cap = 16; cap <= 1024; cap *= 2) {
        for (; k < cap; ++k) {
            KahanSum sk;
            for (std::size_t i = 0; i < n; ++i) {
                if (base[i] != 0.0) sk.add(base[i] * h[i]);
                double next = arg[i] * h[i] - k * hm[i];
                hm[i] = h[i];
                h[i] = next;
            }
            cplx increment = coef * sk.value();
            partial += increment;
            coef *= step * s / double(k + 1);
            if (std::abs(increment) <= tol * std::abs(partial)) {
                if (++consecutive_small >= 3) return {partial, k + 1};
            } else {
                consecutive_small = 0;
            }
        }
    }
    throw std::runtime_error(
        "series_eval: no convergence before K=1024 (eps too small for the grid or extreme arguments)");
}

cplx direct_complex(const TestFunction& f, const Field& x, cplx gamma_prime, double sigma_eps) {
    if (f.values.size() != x.size())
        throw std::invalid_argument("direct_complex: test function and field grids differ");
    if (!(sigma_eps > 0.0)) throw std::invalid_argument("direct_complex: sigma_eps must be positive");
    const cplx log_norm = -0.5 * gamma_prime * gamma_prime * sigma_eps * sigma_eps;
    const double vol = f.grid.cell_volume();
    ExactSum re, im;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (f.values[i] == 0.0) continue;
        cplx term = f.values[i] * std::exp(gamma_prime * x[i] + log_norm) * vol;
        re.add(term.real());
        im.add(term.imag());
    }
    return {re.round(), im.round()};
}

double growth_normalizer(int k, double gamma, int d, double eta) {
    double u = (1.0 + eta) * std::sqrt(2.0) / (std::sqrt(2.0 * d) - std::abs(gamma));
    double kfac = 1.0;
    for (int m = 2; m <= k; ++m) kfac *= m;
    return kfac * std::pow(u, k);
}

}  // namespace gmclab
