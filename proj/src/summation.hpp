#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace gmclab {

// Shewchuk-style exact accumulator: keeps a list of non-overlapping
// partials whose exact sum equals the exact sum of everything added.
// round() returns the correctly rounded double of that exact sum.
class ExactSum {
public:
    void add(double x) {
        std::size_t i = 0;
        for (std::size_t j = 0; j < partials_.size(); ++j) {
            double y = partials_[j];
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            double hi = x + y;
            double lo = y - (hi - x);
            if (lo != 0.0) partials_[i++] = lo;
            x = hi;
        }
        partials_.resize(i);
        partials_.push_back(x);
    }

    double round() const {
        double s = 0.0;
        for (double p : partials_) s += p;
        return s;
    }

    void merge(const ExactSum& other) {
        for (double p : other.partials_) add(p);
    }

    void reset() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

// Neumaier compensated accumulator, for long streaming sums where the
// exact partial list would be overkill.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }
    void reset() { sum_ = comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Order-insensitive reduction used by the replica harness: results are
// stored per index and reduced pairwise in index order, so the outcome
// does not depend on which worker finished first.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace gmclab
