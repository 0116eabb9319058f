#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace hr {

/// Forward-mode dual number carrying partials with respect to up to
/// kMaxSeeds seeded inputs.
class DualNumber {
public:
    static constexpr std::size_t kMaxSeeds = 8;

    DualNumber() = default;
    /// Constant with `n_seeds` zero partials.
    DualNumber(double value, std::size_t n_seeds = 0) : value_(value), n_(n_seeds) { check(n_seeds); }  // NOLINT

    /// Independent variable: partial 1 in slot `seed`.
    static DualNumber variable(double value, std::size_t seed, std::size_t n_seeds) {
        DualNumber d(value, n_seeds);
        if (seed >= n_seeds) throw std::out_of_range("dual seed index out of range");
        d.d_[seed] = 1.0;
        return d;
    }

    [[nodiscard]] double value() const noexcept { return value_; }
    [[nodiscard]] double derivative(std::size_t seed) const noexcept { return seed < n_ ? d_[seed] : 0.0; }
    [[nodiscard]] std::size_t seeds() const noexcept { return n_; }

    friend DualNumber operator+(const DualNumber& a, const DualNumber& b) {
        DualNumber r(a.value_ + b.value_, std::max(a.n_, b.n_));
        for (std::size_t k = 0; k < r.n_; ++k) r.d_[k] = a.derivative(k) + b.derivative(k);
        return r;
    }
    friend DualNumber operator-(const DualNumber& a, const DualNumber& b) {
        DualNumber r(a.value_ - b.value_, std::max(a.n_, b.n_));
        for (std::size_t k = 0; k < r.n_; ++k) r.d_[k] = a.derivative(k) - b.derivative(k);
        return r;
    }
    friend DualNumber operator*(const DualNumber& a, const DualNumber& b) {
        DualNumber r(a.value_ * b.value_, std::max(a.n_, b.n_));
        for (std::size_t k = 0; k < r.n_; ++k) r.d_[k] = a.derivative(k) * b.value_ + a.value_ * b.derivative(k);
        return r;
    }
    friend DualNumber operator/(const DualNumber& a, const DualNumber& b) {
        DualNumber r(a.value_ / b.value_, std::max(a.n_, b.n_));
        const double inv2 = 1.0 / (b.value_ * b.value_);
        for (std::size_t k = 0; k < r.n_; ++k) {
            r.d_[k] = (a.derivative(k) * b.value_ - a.value_ * b.derivative(k)) * inv2;
        }
        return r;
    }
    DualNumber operator-() const {
        DualNumber r(-value_, n_);
        for (std::size_t k = 0; k < n_; ++k) r.d_[k] = -d_[k];
        return r;
    }

    friend DualNumber exp(const DualNumber& a) {
        const double e = std::exp(a.value_);
        DualNumber r(e, a.n_);
        for (std::size_t k = 0; k < a.n_; ++k) r.d_[k] = e * a.d_[k];
        return r;
    }
    friend DualNumber log(const DualNumber& a) {
        DualNumber r(std::log(a.value_), a.n_);
        for (std::size_t k = 0; k < a.n_; ++k) r.d_[k] = a.d_[k] / a.value_;
        return r;
    }
    /// max(a, c) for a constant c. At the kink (a == c) the derivative is 0.
    friend DualNumber max(const DualNumber& a, double c) {
        if (a.value_ > c) return a;
        return DualNumber(c, a.n_);
    }

private:
    static void check(std::size_t n) {
        if (n > kMaxSeeds) throw std::length_error("too many dual seeds");
    }

    double value_ = 0.0;
    std::size_t n_ = 0;
    std::array<double, kMaxSeeds> d_{};
};

// Overloads so payoff code can be written once for double and DualNumber.
inline double max(double a, double c) { return a > c ? a : c; }

}  // namespace hr
