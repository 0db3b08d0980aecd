#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmrs/transform.hpp"

namespace cmrs {

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] double norm_inf() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// LU factorization with partial pivoting. A pivot smaller than
/// 1e-14 * ||A||_inf raises SingularMatrixError.
class ComplexLu {
public:
    explicit ComplexLu(ComplexMatrix a);
    [[nodiscard]] std::vector<Complex> solve(std::span<const Complex> b) const;

private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
};

[[nodiscard]] std::vector<Complex> complex_solve(const ComplexMatrix& a, std::span<const Complex> b);

}  // namespace cmrs
