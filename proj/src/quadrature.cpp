#include "lxs/quadrature.hpp"

#include <array>

namespace lxs {

const GaussLegendreRule<double>& gauss_legendre_cached(int n) {
  static const auto table = [] {
    std::array<GaussLegendreRule<double>, 33> rules;
    for (int i = 1; i <= 32; ++i) rules[i] = gauss_legendre<double>(i);
    return rules;
  }();
  if (n < 1 || n > 32) throw std::invalid_argument("gauss_legendre_cached: n outside [1, 32]");
  return table[n];
}

}  // namespace lxs
