#pragma once

#include <cmath>
#include <complex>

namespace cmrs {

/// Neumaier-compensated running sum.
template <typename T>
class CompensatedSum {
public:
    void add(T x) noexcept {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] T value() const noexcept { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

/// Componentwise compensated sum of complex values.
class CompensatedComplexSum {
public:
    void add(std::complex<double> x) noexcept {
        re_.add(x.real());
        im_.add(x.imag());
    }
    [[nodiscard]] std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<double> re_;
    CompensatedSum<double> im_;
};

}  // namespace cmrs
