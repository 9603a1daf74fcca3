#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gevrey {

using cdouble = std::complex<double>;

constexpr int kAmpOrder = 6;  // samples per interpolation window (quintic)

// Moment integrals G_m(z) = int_0^1 e^{z t} t^m dt, m = 0..kAmpOrder-1.
// Series for small |z|, upward integration-by-parts recurrence otherwise.
inline std::array<cdouble, kAmpOrder> exp_moments(cdouble z) {
  std::array<cdouble, kAmpOrder> g;
  if (std::abs(z) < 0.75) {
    for (int m = 0; m < kAmpOrder; ++m) {
      cdouble pow_term = 1.0;  // z^k / k!
      cdouble sum = 0.0;
      for (int k = 0; k < 34; ++k) {
        if (k > 0) pow_term *= z / double(k);
        sum += pow_term / double(m + k + 1);
        if (std::abs(pow_term) < 1e-19) break;
      }
      g[m] = sum;
    }
  } else {
    const cdouble ez = std::exp(z);
    g[0] = (ez - 1.0) / z;
    for (int m = 1; m < kAmpOrder; ++m) g[m] = (ez - double(m) * g[m - 1]) / z;
  }
  return g;
}

// Coefficients of the degree-(kAmpOrder-1) polynomial through samples placed
// at parameter values t[0..kAmpOrder-1]; rows map samples to monomials.
struct PolyMap {
  std::array<std::array<double, kAmpOrder>, kAmpOrder> w{};

  PolyMap() = default;
  explicit PolyMap(const std::array<double, kAmpOrder>& t) {
    for (int i = 0; i < kAmpOrder; ++i) {
      // Lagrange basis l_i(t) expanded in monomials
      std::array<double, kAmpOrder> poly{};
      poly[0] = 1.0;
      double denom = 1.0;
      int deg = 0;
      for (int j = 0; j < kAmpOrder; ++j) {
        if (j == i) continue;
        denom *= (t[i] - t[j]);
        for (int m = deg; m >= 0; --m) {
          poly[m + 1] += poly[m];
          poly[m] *= -t[j];
        }
        ++deg;
      }
      for (int m = 0; m < kAmpOrder; ++m) w[m][i] = poly[m] / denom;
    }
  }

  template <typename T>
  std::array<T, kAmpOrder> coeffs(const T* s) const {
    std::array<T, kAmpOrder> a{};
    for (int m = 0; m < kAmpOrder; ++m) {
      T acc{};
      for (int i = 0; i < kAmpOrder; ++i) acc += w[m][i] * s[i];
      a[m] = acc;
    }
    return a;
  }
};

// Interpolation windows on a uniform grid for the interval [i, i+1] in local
// parameter t in [0,1]: the window [w0, w0+5] gives sample offsets w0-i..w0-i+5.
// Windows are clamped into [lo, n-1]; the per-offset maps are cached.
class AmplitudeFamily {
 public:
  AmplitudeFamily() {
    for (int off = -(kAmpOrder - 1); off <= 0; ++off) {
      std::array<double, kAmpOrder> t{};
      for (int s = 0; s < kAmpOrder; ++s) t[s] = off + s;
      maps_[off + kAmpOrder - 1] = PolyMap(t);
    }
  }

  // window start for interval [i, i+1] with usable nodes [lo, n-1]
  static int window_start(int i, int lo, int n) {
    int w0 = i - kAmpOrder / 2 + 1;
    if (w0 < lo) w0 = lo;
    if (w0 + kAmpOrder > n) w0 = n - kAmpOrder;
    return w0;
  }

  template <typename T>
  std::array<T, kAmpOrder> interval_coeffs(const std::vector<T>& f, int i, int lo = 0) const {
    const int n = static_cast<int>(f.size());
    if (n < kAmpOrder) throw std::invalid_argument("AmplitudeFamily: row too short");
    const int w0 = window_start(i, lo, n);
    return maps_[(w0 - i) + kAmpOrder - 1].coeffs(f.data() + w0);
  }

 private:
  std::array<PolyMap, kAmpOrder> maps_;
};

}  // namespace gevrey
