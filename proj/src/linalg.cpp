#include "cmrs/linalg.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace cmrs {

double ComplexMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) row += std::abs((*this)(r, c));
        best = std::max(best, row);
    }
    return best;
}

ComplexLu::ComplexLu(ComplexMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t p = lu_.rows();
    if (lu_.cols() != p) throw DomainError("LU factorization requires a square matrix");
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double threshold = 1e-14 * lu_.norm_inf();
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < p; ++r) {
            const double v = std::abs(lu_(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best >= threshold) || best == 0.0) {
            throw SingularMatrixError("matrix is singular to working precision");
        }
        if (piv != k) {
            for (std::size_t c = 0; c < p; ++c) std::swap(lu_(k, c), lu_(piv, c));
            std::swap(perm_[k], perm_[piv]);
        }
        const Complex d = lu_(k, k);
        for (std::size_t r = k + 1; r < p; ++r) {
            const Complex f = lu_(r, k) / d;
            lu_(r, k) = f;
            if (f == Complex{}) continue;
            for (std::size_t c = k + 1; c < p; ++c) lu_(r, c) -= f * lu_(k, c);
        }
    }
}

std::vector<Complex> ComplexLu::solve(std::span<const Complex> b) const {
    const std::size_t p = lu_.rows();
    if (b.size() != p) throw DomainError("right-hand side has the wrong length");
    std::vector<Complex> x(p);
    for (std::size_t r = 0; r < p; ++r) {
        Complex acc = b[perm_[r]];
        for (std::size_t c = 0; c < r; ++c) acc -= lu_(r, c) * x[c];
        x[r] = acc;
    }
    for (std::size_t r = p; r-- > 0;) {
        Complex acc = x[r];
        for (std::size_t c = r + 1; c < p; ++c) acc -= lu_(r, c) * x[c];
        x[r] = acc / lu_(r, r);
    }
    return x;
}

std::vector<Complex> complex_solve(const ComplexMatrix& a, std::span<const Complex> b) {
    return ComplexLu(a).solve(b);
}

}  // namespace cmrs
