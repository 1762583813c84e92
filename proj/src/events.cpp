#include "events.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"
#include "summation.hpp"

namespace gmclab {

void GoodEventConfig::validate() const {
    if (!(gamma_hat > 0.0)) throw std::invalid_argument("GoodEventConfig: gamma_hat must be positive");
    if (n0 > n_fine) throw std::invalid_argument("GoodEventConfig: n0 <= N required");
    if (n0 < 0) throw std::invalid_argument("GoodEventConfig: n0 must be nonnegative");
}

double GoodEventConfig::default_gamma_hat(double gamma, int d) {
    double top = std::sqrt(2.0 * d);
    return gamma + 0.6 * (top - gamma);
}

void cell_rep(const double* x, int dim, int n, double* out) {
    double scale = std::exp(double(n));
    for (int a = 0; a < dim; ++a)
        out[a] = std::floor(x[a] * scale + 0.5) / scale;
}

ScaleFields::ScaleFields(const FieldSample& sample, int n0, int n_fine)
    : grid_(sample.grid), n0_(n0), n_fine_(n_fine) {
    if (n0 > n_fine) throw std::invalid_argument("ScaleFields: n0 <= N required");
    if (double(n_fine) > sample.t_max + 1e-9)
        throw std::invalid_argument("ScaleFields: sample depth below finest scale");
    cumulative_.reserve(n_fine - n0 + 1);
    for (int n = n0; n <= n_fine; ++n) cumulative_.push_back(sample.truncated(double(n)));

    // representatives snap to the nearest grid site
    const std::size_t size = grid_.size();
    rep_site_.resize(n_fine - n0 + 1);
    for (int n = n0; n <= n_fine; ++n) {
        auto& reps = rep_site_[n - n0];
        reps.resize(size);
        for (std::size_t i = 0; i < size; ++i) {
            double xy[2], rep[2];
            grid_.site_coords(i, xy);
            cell_rep(xy, grid_.dim, n, rep);
            reps[i] = std::uint32_t(grid_.nearest_site(rep));
        }
    }
}

double ScaleFields::at_rep(int n, std::size_t site) const {
    return cumulative_[n - n0_][rep_site_[n - n0_][site]];
}

std::optional<int> ScaleFields::first_failure(std::size_t site, double gamma_hat) const {
    for (int n = n0_; n <= n_fine_; ++n)
        if (at_rep(n, site) > gamma_hat * n) return n;
    return std::nullopt;
}

std::optional<int> first_failure_scale(const FieldSample& sample, const double* x,
                                       const GoodEventConfig& cfg) {
    cfg.validate();
    if (double(cfg.n_fine) > sample.t_max + 1e-9)
        throw std::invalid_argument("first_failure_scale: sample depth below finest scale");
    for (int n = cfg.n0; n <= cfg.n_fine; ++n) {
        double rep[2];
        cell_rep(x, sample.grid.dim, n, rep);
        std::size_t site = sample.grid.nearest_site(rep);
        Field xn = sample.truncated(double(n));
        if (xn[site] > cfg.gamma_hat * n) return n;
    }
    return std::nullopt;
}

SplitResult split_good_bad(const TestFunction& f, const FieldSample& sample, int k, cplx gamma,
                           const GoodEventConfig& cfg) {
    cfg.validate();
    if (f.values.size() != sample.grid.size())
        throw std::invalid_argument("split_good_bad: test function grid mismatch");
    ScaleFields scales(sample, cfg.n0, cfg.n_fine);
    Field x = sample.truncated(double(cfg.n_fine));
    double sigma = std::sqrt(sample.band_variance(double(cfg.n_fine)));
    if (!(sigma > 0.0)) throw std::invalid_argument("split_good_bad: degenerate field variance");

    const double s = sigma;
    const cplx shift = gamma * s * s;
    const cplx log_norm = -0.5 * gamma * gamma * s * s;
    const double sk = std::pow(s, k);
    const double vol = f.grid.cell_volume();

    // the `total` accumulators replicate estimate_I's term expression and
    // site order exactly, so total == estimate_I to the last bit
    ExactSum good_re, good_im, bad_re, bad_im, tot_re, tot_im;
    SplitResult res;
    for (std::size_t i = 0; i < x.size(); ++i) {
        bool good = !scales.first_failure(i, cfg.gamma_hat).has_value();
        if (good)
            ++res.n_good;
        else
            ++res.n_bad;
        if (f.values[i] == 0.0) continue;
        cplx w = sk * hermite_recurrence(k, (x[i] - shift) / s) * std::exp(gamma * x[i] + log_norm);
        cplx term = f.values[i] * w * vol;
        tot_re.add(term.real());
        tot_im.add(term.imag());
        if (good) {
            good_re.add(term.real());
            good_im.add(term.imag());
        } else {
            bad_re.add(term.real());
            bad_im.add(term.imag());
        }
    }
    res.good = {good_re.round(), good_im.round()};
    res.bad = {bad_re.round(), bad_im.round()};
    res.total = {tot_re.round(), tot_im.round()};
    return res;
}

double thickness_max(const FieldSample& sample, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("thickness_max: t must be positive");
    if (t > sample.t_max + 1e-9)
        throw std::invalid_argument("thickness_max: t beyond sample depth");
    Field x = sample.truncated(t);
    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    return mx / t;
}

McStat toy_martingale_stat(int k, int T, long replicas, std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("toy_martingale_stat: T >= 1 required");
    if (replicas < 10000)
        throw std::invalid_argument("toy_martingale_stat: at least 1e4 replicas required");
    const double scale = std::pow(double(T), 0.5 * k);
    const double sqrt_t = std::sqrt(double(T));
    KahanSum sum, sum_sq;
    for (long r = 0; r < replicas; ++r) {
        Rng rng(seed, std::uint64_t(r));
        double b = 0.0;
        bool below = true;  // B_0 = 0 <= 0
        for (int t = 1; t <= T; ++t) {
            b += rng.next_normal();
            if (b > double(t)) below = false;
        }
        double v = below ? scale * hermite_eval(k, b / sqrt_t) : 0.0;
        sum.add(v);
        sum_sq.add(v * v);
    }
    double n = double(replicas);
    double mean = sum.value() / n;
    double var = (sum_sq.value() - n * mean * mean) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace gmclab
