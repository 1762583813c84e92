#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace gmclab {

using cplx = std::complex<double>;

// Probabilists' Hermite polynomials He_k, monic and orthogonal in
// L2(e^{-x^2/2} dx). Explicit coefficients are built once by the integer
// recurrence He_{k+1} = x He_k - k He_{k-1}; rows up to k=20 are exact
// int64 and rows up to k=30 are still integer-exact as doubles (largest
// coefficient ~6.2e15 < 2^53).
class HermiteWorkspace {
public:
    explicit HermiteWorkspace(int k_max = 30);

    int k_max() const { return k_max_; }

    // coefficient of x^{k-2m}, equal to k!(-1)^m / (m!(k-2m)! 2^m)
    double coeff(int k, int m) const;
    std::int64_t coeff_exact(int k, int m) const;  // requires k <= 20

    double eval_explicit(int k, double x) const;

    static const HermiteWorkspace& shared();

private:
    int k_max_;
    std::vector<std::vector<double>> rows_;         // rows_[k][m]
    std::vector<std::vector<std::int64_t>> exact_;  // k <= 20
};

// He_k(x): explicit exact-coefficient sum for k <= 20, three-term
// recurrence beyond.
double hermite_eval(int k, double x);
// recurrence evaluation (any k); also defined for complex arguments
double hermite_recurrence(int k, double x);
cplx hermite_recurrence(int k, cplx x);

// |sum_{n<=K} t^n/n! He_{k+n}(x) - e^{tx-t^2/2} He_k(x-t)|; k=0 checks
// the plain generating function.
double generating_series_residual(double t, double x, int k, int K);

enum class Umbral { mix, shift, scale };

// Absolute defect of the selected umbral identity.
//   mix:   He_k(rho*u + sqrt(1-rho^2)*v) = sum_j C(k,j) rho^j (1-rho^2)^{(k-j)/2} He_j(u) He_{k-j}(v)
//   shift: He_k(u+v) = sum_j C(k,j) u^j He_{k-j}(v)            (rho ignored)
//   scale: He_k(rho*u) = sum_i (-1)^i rho^{k-2i} (1-rho^2)^i C(k,2i) (2i)!/(i! 2^i) He_{k-2i}(u)   (v ignored)
double umbral_residual(Umbral which, int k, double rho, double u, double v);

struct MehlerBound {
    double bound;
    bool holds;
};
// (1-rho^2)^{-1/4} rho^{-k/2} sqrt(k!) exp(rho x^2 / (2(1+rho))), and
// whether |He_k(x)| respects it. Requires rho in (0,1).
MehlerBound mehler_bound(int k, double x, double rho);

// Parameters of the normalized power-exponential :Z^k e^{gamma Z}: of a
// centred Gaussian Z with standard deviation sigma.
struct WickTriple {
    int k;
    cplx gamma;
    double sigma;
};

enum class WickMethod { closed, series, derivative };

// :z^k e^{gamma z}: evaluated by one of three equivalent routes:
//   closed:     sigma^k He_k((z - gamma sigma^2)/sigma) e^{gamma z - gamma^2 sigma^2/2}
//   series:     sum_n gamma^n/n! sigma^{n+k} He_{n+k}(z/sigma)
//   derivative: k! [h^k] e^{(gamma+h)z - (gamma+h)^2 sigma^2/2}, the h^k
//               Taylor coefficient extracted from the product of the two
//               entire factors e^{h w} e^{-h^2 sigma^2/2}.
cplx wick_power_exp(double z, const WickTriple& w, WickMethod method);

// E[He_k(sigma X + m)] = (1-sigma^2)^{k/2} He_k(m/sqrt(1-sigma^2)),
// X standard normal, |sigma| < 1.
double gauss_expect_hermite(int k, double sigma1, double m1);

// E[He_k(sigma1 X1 + m1) He_k(sigma2 X2 + m2)] for a standard bivariate
// Gaussian pair with correlation rho, |sigma_i| < 1.
double gauss_expect_hermite_pair(int k, double sigma1, double m1, double sigma2,
                                 double m2, double rho);

// E[:X^j e^{g1 X}: :Y^k e^{g2 Y}:] for jointly Gaussian (X,Y) with
// Cov(X,Y) = cov, via the Wick-power pairing series
//   sum_{n+j = m+k} g1^n g2^m / (n! m!) (n+j)! cov^{n+j}.
// Terms below trunc_tol times the running sum are dropped.
cplx wick_pair_moment(int j, int k, cplx g1, cplx g2, double cov, double trunc_tol);

}  // namespace gmclab
