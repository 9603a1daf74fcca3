#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gevrey {

// Fornberg's algorithm: weights of the m-th derivative at x0 from samples at
// arbitrary nodes. Returns w such that f^(m)(x0) ~ sum_i w[i] f(nodes[i]).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int m) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (n + 1 < m + 1) throw std::invalid_argument("fd_weights: not enough nodes");
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

// Uniform-grid stencil bundle for the m-th derivative with the given nominal
// accuracy order. Centered in the interior, one-sided near the edges.
struct UniformStencil {
  int m = 0;
  int half = 0;                            // half-width of the centered stencil
  std::vector<double> centered;            // length 2*half+1, scaled by 1/h^m
  std::vector<std::vector<double>> edge;   // rows 0..half-1: stencils anchored at node r
  std::vector<std::vector<double>> redge;  // mirrored for the right edge
  int width = 0;                           // node count of one-sided stencils

  UniformStencil() = default;
  UniformStencil(int deriv, int accuracy, double h) : m(deriv) {
    int pts = deriv + accuracy;  // one more than the minimum; keeps symmetry easy
    if ((pts - 1) % 2 != 0) pts += 1;
    half = (pts - 1) / 2;
    std::vector<double> xs(pts);
    for (int i = 0; i < pts; ++i) xs[i] = (i - half) * h;
    centered = fd_weights(0.0, xs, m);
    width = pts;
    std::vector<double> xe(pts);
    for (int i = 0; i < pts; ++i) xe[i] = i * h;
    edge.resize(half);
    redge.resize(half);
    for (int r = 0; r < half; ++r) {
      edge[r] = fd_weights(r * h, xe, m);
      redge[r] = fd_weights((pts - 1 - r) * h, xe, m);
    }
  }

  // Differentiate a sampled row. T is double or complex<double>.
  template <typename T>
  std::vector<T> apply(const std::vector<T>& f) const {
    const int n = static_cast<int>(f.size());
    if (n < width) throw std::invalid_argument("UniformStencil: row too short");
    std::vector<T> out(n, T{});
    for (int i = 0; i < half; ++i) {
      T acc{};
      for (int k = 0; k < width; ++k) acc += edge[i][k] * f[k];
      out[i] = acc;
      T racc{};
      for (int k = 0; k < width; ++k) racc += redge[i][k] * f[n - width + k];
      out[n - 1 - i] = racc;
    }
    for (int i = half; i < n - half; ++i) {
      T acc{};
      for (int k = -half; k <= half; ++k) acc += centered[k + half] * f[i + k];
      out[i] = acc;
    }
    return out;
  }
};

}  // namespace gevrey
