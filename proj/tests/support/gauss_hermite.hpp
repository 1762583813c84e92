#pragma once

// Test-side Gauss-Hermite oracle built on GSL's fixed-point tables so it
// shares no code with the library's Hermite evaluation. Nodes/weights are
// for the weight e^{-x^2/2}; expect() divides by sqrt(2*pi) to average
// against the standard normal density.

#include <gsl/gsl_integration.h>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

class GaussHermite {
public:
    explicit GaussHermite(int n = 64) {
        gsl_integration_fixed_workspace* ws = gsl_integration_fixed_alloc(
            gsl_integration_fixed_hermite, n, 0.0, 0.5, 0.0, 0.0);
        if (!ws) throw std::runtime_error("gsl_integration_fixed_alloc failed");
        const double* x = gsl_integration_fixed_nodes(ws);
        const double* w = gsl_integration_fixed_weights(ws);
        nodes_.assign(x, x + n);
        weights_.assign(w, w + n);
        gsl_integration_fixed_free(ws);
    }

    // E[f(X)], X ~ N(0,1)
    double expect(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
        return s / std::sqrt(2.0 * M_PI);
    }

    // E[f(X1,X2)] for standard bivariate Gaussian with correlation rho,
    // via X2 = rho X1 + sqrt(1-rho^2) Z
    double expect2(const std::function<double(double, double)>& f, double rho) const {
        double q = std::sqrt(1.0 - rho * rho);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            double inner = 0.0;
            for (std::size_t j = 0; j < nodes_.size(); ++j)
                inner += weights_[j] * f(nodes_[i], rho * nodes_[i] + q * nodes_[j]);
            s += weights_[i] * inner;
        }
        return s / (2.0 * M_PI);
    }

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace testsupport
