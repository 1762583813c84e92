#include "hermite.hpp"

#include <cmath>
#include <stdexcept>

#include "summation.hpp"

namespace gmclab {

HermiteWorkspace::HermiteWorkspace(int k_max) : k_max_(k_max) {
    if (k_max < 0 || k_max > 33)
        throw std::invalid_argument("HermiteWorkspace: k_max must be in [0,33]");
    // integer coefficient recurrence on full power tables c[k][j] = [x^j] He_k
    std::vector<std::vector<std::int64_t>> c(k_max + 1);
    c[0] = {1};
    if (k_max >= 1) c[1] = {0, 1};
    for (int k = 1; k < k_max; ++k) {
        std::vector<std::int64_t> next(k + 2, 0);
        for (int j = 0; j <= k; ++j) next[j + 1] += c[k][j];
        for (int j = 0; j < k; ++j) next[j] -= std::int64_t(k) * c[k - 1][j];
        c[k + 1] = std::move(next);
    }
    rows_.resize(k_max + 1);
    exact_.resize(std::min(k_max, 20) + 1);
    for (int k = 0; k <= k_max; ++k) {
        rows_[k].resize(k / 2 + 1);
        if (k <= 20) exact_[k].resize(k / 2 + 1);
        for (int m = 0; m <= k / 2; ++m) {
            std::int64_t v = c[k][k - 2 * m];
            rows_[k][m] = static_cast<double>(v);
            if (k <= 20) exact_[k][m] = v;
        }
    }
}

double HermiteWorkspace::coeff(int k, int m) const {
    return rows_.at(k).at(m);
}

std::int64_t HermiteWorkspace::coeff_exact(int k, int m) const {
    if (k > 20) throw std::invalid_argument("coeff_exact: exact rows end at k=20");
    return exact_.at(k).at(m);
}

double HermiteWorkspace::eval_explicit(int k, double x) const {
    if (k > k_max_) throw std::invalid_argument("eval_explicit: k beyond workspace");
    ExactSum s;
    double xp = (k % 2 == 0) ? 1.0 : x;  // x^{k-2m}, lowest power first
    const double x2 = x * x;
    for (int m = k / 2; m >= 0; --m) {
        s.add(rows_[k][m] * xp);
        xp *= x2;
    }
    return s.round();
}

const HermiteWorkspace& HermiteWorkspace::shared() {
    static const HermiteWorkspace ws(30);
    return ws;
}

double hermite_recurrence(int k, double x) {
    if (k == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int m = 1; m < k; ++m) {
        double next = x * h - m * hm;
        hm = h;
        h = next;
    }
    return h;
}

cplx hermite_recurrence(int k, cplx x) {
    if (k == 0) return 1.0;
    cplx hm = 1.0, h = x;
    for (int m = 1; m < k; ++m) {
        cplx next = x * h - double(m) * hm;
        hm = h;
        h = next;
    }
    return h;
}

double hermite_eval(int k, double x) {
    if (k < 0) throw std::invalid_argument("hermite_eval: k must be nonnegative");
    if (k <= 20) return HermiteWorkspace::shared().eval_explicit(k, x);
    return hermite_recurrence(k, x);
}

double generating_series_residual(double t, double x, int k, int K) {
    if (k < 0 || K < 0) throw std::invalid_argument("generating_series_residual: k, K >= 0");
    ExactSum s;
    // rolling He pair starting at order k
    double hm = (k == 0) ? 0.0 : hermite_eval(k - 1, x);
    double h = hermite_eval(k, x);
    double coef = 1.0;  // t^n / n!
    for (int n = 0; n <= K; ++n) {
        s.add(coef * h);
        double next = x * h - (k + n) * hm;
        hm = h;
        h = next;
        coef *= t / (n + 1);
    }
    double closed = std::exp(t * x - 0.5 * t * t) * hermite_eval(k, x - t);
    return std::abs(s.round() - closed);
}

namespace {

double binomial(int n, int j) {
    double b = 1.0;
    for (int i = 1; i <= j; ++i) b *= double(n - j + i) / double(i);
    return b;
}

}  // namespace

double umbral_residual(Umbral which, int k, double rho, double u, double v) {
    if (k < 0) throw std::invalid_argument("umbral_residual: k >= 0");
    if (which != Umbral::shift && std::abs(rho) > 1.0)
        throw std::invalid_argument("umbral_residual: |rho| <= 1 required");
    switch (which) {
        case Umbral::mix: {
            double q = std::sqrt(1.0 - rho * rho);
            double lhs = hermite_eval(k, rho * u + q * v);
            ExactSum rhs;
            for (int j = 0; j <= k; ++j)
                rhs.add(binomial(k, j) * std::pow(rho, j) * std::pow(q, k - j) *
                        hermite_eval(j, u) * hermite_eval(k - j, v));
            return std::abs(lhs - rhs.round());
        }
        case Umbral::shift: {
            double lhs = hermite_eval(k, u + v);
            ExactSum rhs;
            for (int j = 0; j <= k; ++j)
                rhs.add(binomial(k, j) * std::pow(u, j) * hermite_eval(k - j, v));
            return std::abs(lhs - rhs.round());
        }
        case Umbral::scale: {
            double lhs = hermite_eval(k, rho * u);
            ExactSum rhs;
            double q2 = 1.0 - rho * rho;
            for (int i = 0; i <= k / 2; ++i) {
                double fac = 1.0;  // (2i)! / (i! 2^i) = (2i-1)!!
                for (int m = 1; m <= i; ++m) fac *= 2 * m - 1;
                double sign = (i % 2 == 0) ? 1.0 : -1.0;
                rhs.add(sign * std::pow(rho, k - 2 * i) * std::pow(q2, i) *
                        binomial(k, 2 * i) * fac * hermite_eval(k - 2 * i, u));
            }
            return std::abs(lhs - rhs.round());
        }
    }
    throw std::logic_error("umbral_residual: unknown selector");
}

MehlerBound mehler_bound(int k, double x, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("mehler_bound: rho must lie in (0,1)");
    double log_b = -0.25 * std::log1p(-rho * rho) - 0.5 * k * std::log(rho) +
                   0.5 * std::lgamma(k + 1.0) + rho * x * x / (2.0 * (1.0 + rho));
    double bound = std::exp(log_b);
    bool holds = std::abs(hermite_eval(k, x)) <= bound;
    return {bound, holds};
}

namespace {

cplx wick_closed(double z, const WickTriple& w) {
    const double s = w.sigma;
    cplx arg = (z - w.gamma * s * s) / s;
    cplx h = hermite_recurrence(w.k, arg);
    return std::pow(s, w.k) * h * std::exp(w.gamma * z - 0.5 * w.gamma * w.gamma * s * s);
}

cplx wick_series(double z, const WickTriple& w) {
    const double s = w.sigma;
    const double xs = z / s;
    // rolling He_{n+k}(z/sigma); sigma^{n+k} folded into the coefficient
    double hm = (w.k == 0) ? 0.0 : hermite_recurrence(w.k - 1, xs);
    double h = hermite_recurrence(w.k, xs);
    cplx coef = std::pow(s, w.k);  // gamma^n/n! sigma^{n+k}
    cplx sum = 0.0;
    double abs_sum = 0.0;
    int low_count = 0;
    for (int n = 0; n < 400; ++n) {
        cplx term = coef * h;
        sum += term;
        abs_sum += std::abs(term);
        if (std::abs(term) <= 1e-16 * abs_sum) {
            if (++low_count >= 3) break;
        } else {
            low_count = 0;
        }
        double next = xs * h - (w.k + n) * hm;
        hm = h;
        h = next;
        coef *= w.gamma * s / double(n + 1);
    }
    return sum;
}

cplx wick_derivative(double z, const WickTriple& w) {
    // k-th Taylor coefficient in h of e^{h w0} e^{-h^2 s^2/2} with
    // w0 = z - gamma s^2:  [h^k] = sum_{i+2j=k} w0^i/i! (-s^2/2)^j/j!
    const double s2 = w.sigma * w.sigma;
    cplx w0 = z - w.gamma * s2;
    cplx acc = 0.0;
    for (int j = 0; 2 * j <= w.k; ++j) {
        int i = w.k - 2 * j;
        cplx term = std::pow(w0, i);
        for (int m = 2; m <= i; ++m) term /= double(m);
        double b = 1.0;
        for (int m = 1; m <= j; ++m) b *= -0.5 * s2 / double(m);
        acc += term * b;
    }
    double kfac = 1.0;
    for (int m = 2; m <= w.k; ++m) kfac *= m;
    return kfac * acc * std::exp(w.gamma * z - 0.5 * w.gamma * w.gamma * s2);
}

}  // namespace

cplx wick_power_exp(double z, const WickTriple& w, WickMethod method) {
    if (!(w.sigma > 0.0)) throw std::invalid_argument("wick_power_exp: sigma must be positive");
    if (w.k < 0) throw std::invalid_argument("wick_power_exp: k must be nonnegative");
    switch (method) {
        case WickMethod::closed: return wick_closed(z, w);
        case WickMethod::series: return wick_series(z, w);
        case WickMethod::derivative: return wick_derivative(z, w);
    }
    throw std::logic_error("wick_power_exp: unknown method");
}

double gauss_expect_hermite(int k, double sigma1, double m1) {
    if (!(std::abs(sigma1) < 1.0))
        throw std::invalid_argument("gauss_expect_hermite: |sigma| < 1 required");
    double q = std::sqrt(1.0 - sigma1 * sigma1);
    return std::pow(1.0 - sigma1 * sigma1, 0.5 * k) * hermite_eval(k, m1 / q);
}

double gauss_expect_hermite_pair(int k, double sigma1, double m1, double sigma2,
                                 double m2, double rho) {
    if (!(std::abs(sigma1) < 1.0 && std::abs(sigma2) < 1.0))
        throw std::invalid_argument("gauss_expect_hermite_pair: |sigma_i| < 1 required");
    if (std::abs(rho) > 1.0)
        throw std::invalid_argument("gauss_expect_hermite_pair: |rho| <= 1 required");
    double q1 = 1.0 - sigma1 * sigma1;
    double q2 = 1.0 - sigma2 * sigma2;
    double h1arg = m1 / std::sqrt(q1);
    double h2arg = m2 / std::sqrt(q2);
    ExactSum s;
    double kfac = 1.0;
    for (int m = 2; m <= k; ++m) kfac *= m;
    for (int l = 0; l <= k; ++l) {
        // k!^2 / (l! (k-l)!^2) = k! * C(k,l) / (k-l)!
        double c = kfac * binomial(k, l);
        for (int m = 2; m <= k - l; ++m) c /= double(m);
        s.add(std::pow(q1, 0.5 * (k - l)) * std::pow(q2, 0.5 * (k - l)) *
              std::pow(rho * sigma1 * sigma2, l) * c * hermite_eval(k - l, h1arg) *
              hermite_eval(k - l, h2arg));
    }
    return s.round();
}

cplx wick_pair_moment(int j, int k, cplx g1, cplx g2, double cov, double trunc_tol) {
    if (!(trunc_tol > 0.0)) throw std::invalid_argument("wick_pair_moment: trunc_tol > 0 required");
    if (j < 0 || k < 0) throw std::invalid_argument("wick_pair_moment: j, k >= 0");
    // s = n + j = m + k runs from max(j,k); term ratio is
    // g1 g2 cov (s+1) / ((s+1-j)(s+1-k))
    const int s0 = std::max(j, k);
    cplx term = std::pow(g1, s0 - j) * std::pow(g2, s0 - k) * std::pow(cov, s0);
    for (int m = 2; m <= s0 - j; ++m) term /= double(m);
    for (int m = 2; m <= s0 - k; ++m) term /= double(m);
    for (int m = 2; m <= s0; ++m) term *= double(m);
    cplx sum = 0.0;
    int low_count = 0;
    for (int s = s0; s < s0 + 400; ++s) {
        sum += term;
        if (std::abs(term) <= trunc_tol * std::abs(sum)) {
            if (++low_count >= 2) break;
        } else {
            low_count = 0;
        }
        term *= g1 * g2 * cov * double(s + 1) /
                (double(s + 1 - j) * double(s + 1 - k));
    }
    return sum;
}

}  // namespace gmclab
