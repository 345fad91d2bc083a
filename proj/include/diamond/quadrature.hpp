#pragma once

#include <vector>

namespace diamonds {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule; thread safe.
const GaussRule& gauss_legendre(int n);

/// Composite n-point Gauss-Legendre over [a, b] split into `panels` equal parts.
template <class F>
auto integrate_gl(F&& f, double a, double b, int n, int panels = 1) {
  const GaussRule& rule = gauss_legendre(n);
  const double width = (b - a) / panels;
  decltype(f(a)) sum{};
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    const double half = 0.5 * width;
    decltype(f(a)) part{};
    for (int i = 0; i < n; ++i) part += rule.weights[i] * f(mid + half * rule.nodes[i]);
    sum += half * part;
  }
  return sum;
}

/// Gauss-Legendre nodes on [a, b] with the density graded toward a by the map
/// x = a + (b - a) s^q, s uniform in [0, 1]. Weights include the Jacobian.
struct GradedNodes {
  std::vector<double> x;
  std::vector<double> w;
};
GradedNodes graded_nodes(double a, double b, int n, double q);

}  // namespace diamonds
