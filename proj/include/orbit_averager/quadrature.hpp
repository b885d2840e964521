// Gauss-Legendre rules.  Used as the independent oracle for every closed-form
// integral in the library.
#ifndef ORBIT_AVERAGER_QUADRATURE_HPP
#define ORBIT_AVERAGER_QUADRATURE_HPP

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <utility>
#include <numbers>
#include <stdexcept>

namespace orbit_averager {

template <typename Scalar>
struct GaussLegendre {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;    // on [-1, 1], ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const int half = (n + 1) / 2;
    // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
    auto legendre = [n](Scalar x) {
      Scalar p0(1), p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = (Scalar(2 * k - 1) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = Scalar(1);
      return std::pair<Scalar, Scalar>{p1, Scalar(n) * (x * p1 - p0) / (x * x - Scalar(1))};
    };
    for (int i = 0; i < half; ++i) {
      // Tricomi's initial guess, then Newton.
      Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
      for (int iter = 0; iter < 100; ++iter) {
        const auto [p, dp] = legendre(x);
        const Scalar dx = p / dp;
        x -= dx;
        if (std::abs(dx) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon()) break;
      }
      const Scalar dp = legendre(x).second;
      const Scalar w = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = Scalar(0);
  }

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Composite rule: `panels` equal sub-intervals of [a, b], each with `rule`.
template <typename Scalar, typename F>
auto integrate(const F& f, Scalar a, Scalar b, const GaussLegendre<Scalar>& rule, int panels = 1) {
  using Result = std::decay_t<decltype(f(a))>;
  const Scalar width = (b - a) / Scalar(panels);
  Result acc = f(a) * Scalar(0);
  for (int p = 0; p < panels; ++p) {
    const Scalar lo = a + width * Scalar(p);
    const Scalar mid = lo + width / Scalar(2);
    for (int i = 0; i < rule.size(); ++i) {
      acc += (rule.weights[i] * width / Scalar(2)) * f(mid + rule.nodes[i] * width / Scalar(2));
    }
  }
  return acc;
}

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_QUADRATURE_HPP
