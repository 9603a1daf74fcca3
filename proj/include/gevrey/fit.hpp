#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gevrey {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;      // standard error of the slope
  double intercept_se = 0;
  double rms = 0;           // residual rms
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size()) throw std::invalid_argument("fit_line: need >= 3 points");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  const double var = ss / std::max(1, n - 2);
  f.slope_se = std::sqrt(var / sxx);
  f.intercept_se = std::sqrt(var * (1.0 / n + mx * mx / sxx));
  return f;
}

// Least squares for y ~ X c with a small number of columns.
inline Eigen::VectorXd fit_linear_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return X.colPivHouseholderQr().solve(y);
}

}  // namespace gevrey
