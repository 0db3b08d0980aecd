#include "cmrs/gs_weights.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <string>

#include "cmrs/transform.hpp"

namespace cmrs {

namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

cpp_int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    cpp_int c = 1;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

cpp_int power(int base, int e) {
    cpp_int p = 1;
    for (int k = 0; k < e; ++k) p *= base;
    return p;
}

std::vector<Rational> compute(int M) {
    const cpp_int m_fact = factorial(M);
    std::vector<Rational> zeta;
    zeta.reserve(2 * static_cast<std::size_t>(M));
    for (int k = 1; k <= 2 * M; ++k) {
        Rational acc = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, M); ++j) {
            const cpp_int num = power(j, M + 1) * binomial(M, j) * binomial(2 * j, j) * binomial(j, k - j);
            acc += Rational(num, m_fact);
        }
        zeta.push_back((M + k) % 2 == 0 ? acc : Rational(-acc));
    }
    return zeta;
}

}  // namespace

const std::vector<Rational>& gs_weights_exact(int M) {
    if (M < 1 || M > kMaxGsOrder) {
        throw DomainError("Gaver-Stehfest order M = " + std::to_string(M) + " outside 1.." +
                          std::to_string(kMaxGsOrder));
    }
    static std::mutex mutex;
    static std::map<int, std::vector<Rational>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(M);
    if (it == cache.end()) it = cache.emplace(M, compute(M)).first;
    return it->second;
}

std::vector<double> gs_weights(int M) {
    const auto& exact = gs_weights_exact(M);
    std::vector<double> out;
    out.reserve(exact.size());
    for (const auto& z : exact) out.push_back(z.convert_to<double>());
    return out;
}

}  // namespace cmrs
