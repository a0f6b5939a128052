#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace coxkern::quad {

// 20-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
// <= 39.
inline constexpr std::size_t kOrder = 20;

struct Rule {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};
};

inline const Rule& gauss_legendre_rule() {
  static const Rule rule = [] {
    Rule r;
    constexpr std::size_t n = kOrder;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
        }
        dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      r.nodes[i] = -z;
      r.nodes[n - 1 - i] = z;
      r.weights[i] = w;
      r.weights[n - 1 - i] = w;
    }
    return r;
  }();
  return rule;
}

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const Rule& rule = gauss_legendre_rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kOrder; ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

// Composite rule over consecutive ascending breakpoints. Exact for piecewise
// polynomials (degree <= 39) whose pieces end at the breakpoints.
template <class F>
double piecewise(F&& f, std::span<const double> breaks) {
  double sum = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    sum += gauss_legendre(f, breaks[i - 1], breaks[i]);
  }
  return sum;
}

}  // namespace coxkern::quad
