#pragma once

#include <cmath>

namespace pathint::detail {

struct SumParts {
    double sum;
    double err;
};

// Knuth two-sum: sum + err == a + b exactly.
inline SumParts two_sum(double a, double b) {
    double s = a + b;
    double v = s - a;
    double e = (a - (s - v)) + (b - v);
    return {s, e};
}

// Exact product split via fused multiply-add.
inline SumParts two_prod(double a, double b) {
    double p = a * b;
    double e = std::fma(a, b, -p);
    return {p, e};
}

// Compensated accumulator carrying a running error term. Good to roughly
// 2^-100 relative for the sum lengths used here, which keeps the discrete
// integration identities exact at the 1e-12 scale the tests demand.
class Acc {
public:
    void add(double x) {
        SumParts t = two_sum(hi_, x);
        hi_ = t.sum;
        lo_ += t.err;
    }

    void add_product(double a, double b) {
        SumParts p = two_prod(a, b);
        add(p.sum);
        lo_ += p.err;
    }

    // Accumulates phi * (a - b) with the difference split exactly first.
    void add_scaled_diff(double phi, double a, double b) {
        SumParts d = two_sum(a, -b);
        add_product(phi, d.sum);
        lo_ += phi * d.err;
    }

    void add_scaled(const Acc& other, double factor) {
        add(factor * other.hi_);
        lo_ += factor * other.lo_;
    }

    double value() const { return hi_ + lo_; }
    double hi() const { return hi_; }
    double lo() const { return lo_; }

private:
    double hi_ = 0.0;
    double lo_ = 0.0;
};

// Prefix-sum entry for windowed differences.
struct Split {
    double hi = 0.0;
    double lo = 0.0;

    double minus(const Split& other) const {
        return (hi - other.hi) + (lo - other.lo);
    }
};

inline Split parts_of(const Acc& a) { return Split{a.hi(), a.lo()}; }

} // namespace pathint::detail
