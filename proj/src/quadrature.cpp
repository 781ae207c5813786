#include "pfmbem/quadrature.hpp"

#include <array>
#include <cmath>

#include "pfmbem/errors.hpp"
#include "pfmbem/specfun.hpp"

namespace pfmbem {

namespace {

constexpr int kMaxTabulated = 64;

QuadratureRule build_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static const std::array<QuadratureRule, kMaxTabulated + 1> table = [] {
    std::array<QuadratureRule, kMaxTabulated + 1> t;
    for (int k = 1; k <= kMaxTabulated; ++k) t[k] = build_legendre(k);
    return t;
  }();
  if (n < 1 || n > kMaxTabulated) throw RangeError("gauss_legendre: unsupported node count");
  return table[n];
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  const QuadratureRule& ref = gauss_legendre(n);
  QuadratureRule r = ref;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * ref.nodes[i];
    r.weights[i] = half * ref.weights[i];
  }
  return r;
}

QuadratureRule composite_gauss(int n, int panels, double a, double b) {
  QuadratureRule r;
  const double width = (b - a) / panels;
  for (int j = 0; j < panels; ++j) {
    const QuadratureRule p = gauss_legendre(n, a + j * width, a + (j + 1) * width);
    r.nodes.insert(r.nodes.end(), p.nodes.begin(), p.nodes.end());
    r.weights.insert(r.weights.end(), p.weights.begin(), p.weights.end());
  }
  return r;
}

QuadratureRule graded_gauss(int n, double b, double smallest) {
  std::vector<double> edges{b};
  while (edges.back() > smallest) edges.push_back(0.5 * edges.back());
  edges.push_back(0.0);
  QuadratureRule r;
  for (std::size_t j = edges.size() - 1; j > 0; --j) {
    const QuadratureRule p = gauss_legendre(n, edges[j], edges[j - 1]);
    r.nodes.insert(r.nodes.end(), p.nodes.begin(), p.nodes.end());
    r.weights.insert(r.weights.end(), p.weights.begin(), p.weights.end());
  }
  return r;
}

}  // namespace pfmbem
