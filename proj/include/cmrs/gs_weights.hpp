#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

namespace cmrs {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxGsOrder = 24;

/// Exact Gaver-Stehfest weights zeta_1..zeta_{2M}, cached per M.
/// Throws DomainError for M outside [1, kMaxGsOrder].
const std::vector<Rational>& gs_weights_exact(int M);

/// Weights rounded once to double.
std::vector<double> gs_weights(int M);

}  // namespace cmrs
