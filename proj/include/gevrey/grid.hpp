#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gevrey {

// Symmetric truncated x-domain for the oscillator, Dirichlet at +-L.
struct XGrid {
  double L = 0;
  int N = 0;  // total nodes including the boundary pair; odd so that x=0 is a node
  double h = 0;

  XGrid() = default;
  XGrid(double L_, int N_) : L(L_), N(N_) {
    if (N < 9 || N % 2 == 0) throw std::invalid_argument("XGrid: N must be odd and >= 9");
    if (L <= 0) throw std::invalid_argument("XGrid: L must be positive");
    h = 2.0 * L / (N - 1);
  }
  double x(int i) const { return -L + i * h; }
  int center() const { return (N - 1) / 2; }
};

// Uniform rho grid shared by identity across every field of a run.
struct RhoGrid {
  double rho_min = 0;
  double h = 0;
  int n = 0;

  RhoGrid() = default;
  RhoGrid(double rho_min_, double rho_max, double h_) : rho_min(rho_min_), h(h_) {
    if (h <= 0 || rho_max <= rho_min) throw std::invalid_argument("RhoGrid: bad bounds");
    n = static_cast<int>(std::floor((rho_max - rho_min) / h + 0.5)) + 1;
    if (n < 32) throw std::invalid_argument("RhoGrid: too few nodes");
  }
  double rho(int i) const { return rho_min + i * h; }
  double rho_max() const { return rho(n - 1); }
  int index_at_or_above(double r) const {
    const int i = static_cast<int>(std::ceil((r - rho_min) / h - 1e-9));
    return std::max(0, std::min(n - 1, i));
  }
  int nearest_index(double r) const {
    const int i = static_cast<int>(std::floor((r - rho_min) / h + 0.5));
    return std::max(0, std::min(n - 1, i));
  }
};

// Cubic interpolation of a sampled row at an off-grid point.
template <typename T>
T interp_cubic(const RhoGrid& g, const std::vector<T>& f, double r) {
  if (r <= g.rho_min) return f.front();
  if (r >= g.rho_max()) return f.back();
  int i = static_cast<int>((r - g.rho_min) / g.h);
  i = std::max(1, std::min(g.n - 3, i));
  const double t = (r - g.rho(i)) / g.h;
  const T fm = f[i - 1], f0 = f[i], f1 = f[i + 1], f2 = f[i + 2];
  const T a0 = f0;
  const T a1 = ((-2.0) * fm - 3.0 * f0 + 6.0 * f1 - f2) * (1.0 / 6.0);
  const T a2 = (fm - 2.0 * f0 + f1) * 0.5;
  const T a3 = (-fm + 3.0 * f0 - 3.0 * f1 + f2) * (1.0 / 6.0);
  return a0 + t * (a1 + t * (a2 + t * a3));
}

}  // namespace gevrey
