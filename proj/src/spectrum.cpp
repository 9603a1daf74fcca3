#include "gevrey/spectrum.hpp"

#include "gevrey/fdweights.hpp"
#include "gevrey/fit.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gevrey {

namespace {

double potential(int q, double x) { return std::pow(x, 2 * (q - 1)); }

// Lowest nev eigenvalues (and optionally vectors) of the Dirichlet FD
// discretization with spacing h on the interior nodes of [-L, L].
void solve_tridiag(int q, double L, int N, int nev, std::vector<double>& w,
                   std::vector<double>* z) {
  const int n = N - 2;  // interior nodes
  const double h = 2.0 * L / (N - 1);
  std::vector<double> d(n), e(n - 1, -1.0 / (h * h));
  for (int i = 0; i < n; ++i) {
    const double x = -L + (i + 1) * h;
    d[i] = 2.0 / (h * h) + potential(q, x);
  }
  w.assign(n, 0.0);
  std::vector<int> isuppz(2 * std::max(1, nev));
  int m = 0;
  int info;
  if (z) {
    z->assign(static_cast<size_t>(n) * nev, 0.0);
    info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0, 0, 1, nev,
                          0.0, &m, w.data(), z->data(), n, isuppz.data());
  } else {
    std::vector<double> zdummy(1);
    info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0, 0, 1, nev,
                          0.0, &m, w.data(), zdummy.data(), n, isuppz.data());
  }
  if (info != 0 || m < nev)
    throw std::runtime_error("spectrum: tridiagonal eigensolve failed (info=" +
                             std::to_string(info) + ")");
  w.resize(nev);
}

}  // namespace

double mu_estimate_wkb(int q, int k) {
  // Bohr-Sommerfeld for V = x^{2m}, m = q-1:
  //   mu_k = (pi (k + 1/2) / (2 B))^{2m/(m+1)},  B = int_0^1 sqrt(1 - t^{2m}) dt.
  const int m = q - 1;
  const int steps = 2000;
  double B = 0;
  for (int i = 0; i < steps; ++i) {
    const double t0 = double(i) / steps, t1 = double(i + 1) / steps;
    B += 0.5 * (std::sqrt(std::max(0.0, 1.0 - std::pow(t0, 2 * m))) +
                std::sqrt(std::max(0.0, 1.0 - std::pow(t1, 2 * m)))) *
         (t1 - t0);
  }
  const double s = std::numbers::pi * (k + 0.5) / (2.0 * B);
  return std::pow(s, 2.0 * m / (m + 1.0));
}

Spectrum solve_eigenpairs(int q, int K, const XGrid& grid, double residual_tol) {
  if (q < 2 || K < 1) throw std::invalid_argument("solve_eigenpairs: q >= 2, K >= 1");
  const int nev = K + 1;
  if (nev * 10 > grid.N)
    throw std::invalid_argument("solve_eigenpairs: K too large for grid (need K+1 << N)");
  const double muK = mu_estimate_wkb(q, K);
  if (potential(q, grid.L) < muK * 1.2 + 10.0)
    throw std::invalid_argument(
        "solve_eigenpairs: L^(2(q-1)) must dominate mu_K (enlarge L)");
  if ((grid.N - 1) % 4 != 0)
    throw std::invalid_argument("solve_eigenpairs: N-1 must be divisible by 4");

  // Three nested grids h, 2h, 4h for double Richardson extrapolation.
  std::vector<double> w1, w2, w4, z;
  solve_tridiag(q, grid.L, grid.N, nev, w1, &z);
  solve_tridiag(q, grid.L, (grid.N - 1) / 2 + 1, nev, w2, nullptr);
  solve_tridiag(q, grid.L, (grid.N - 1) / 4 + 1, nev, w4, nullptr);

  Spectrum s;
  s.q = q;
  s.K = K;
  s.grid = grid;
  s.mu.resize(nev);
  s.mu_fine = w1;
  s.richardson_delta.resize(nev);
  for (int k = 0; k < nev; ++k) {
    const double e1 = (4.0 * w1[k] - w2[k]) / 3.0;
    const double e2 = (4.0 * w2[k] - w4[k]) / 3.0;
    s.mu[k] = (16.0 * e1 - e2) / 15.0;
    s.richardson_delta[k] = std::abs(s.mu[k] - w1[k]);
  }
  for (int k = 0; k + 1 < nev; ++k)
    if (!(s.mu[k + 1] > s.mu[k]))
      throw std::runtime_error("spectrum: eigenvalues not strictly increasing");
  if (!(s.mu[0] > 0)) throw std::runtime_error("spectrum: nonpositive ground eigenvalue");

  // Eigenfunctions on the full grid (zeros at the Dirichlet boundary), scaled
  // so the trapezoid L2 norm is exactly 1.
  const int n = grid.N - 2;
  const double sqh = std::sqrt(grid.h);
  s.phi.assign(nev, std::vector<double>(grid.N, 0.0));
  for (int k = 0; k < nev; ++k) {
    auto& row = s.phi[k];
    for (int i = 0; i < n; ++i) row[i + 1] = z[static_cast<size_t>(k) * n + i] / sqh;
    // deterministic sign: positive at the first x > 0 where |phi| exceeds half its max
    double amax = 0;
    for (double v : row) amax = std::max(amax, std::abs(v));
    for (int i = grid.center() + 1; i < grid.N; ++i) {
      if (std::abs(row[i]) >= 0.5 * amax) {
        if (row[i] < 0)
          for (double& v : row) v = -v;
        break;
      }
    }
  }

  // Parity flags and residuals against the same discrete operator.
  s.parity.resize(nev);
  s.residual.resize(nev);
  for (int k = 0; k < nev; ++k) {
    const auto& row = s.phi[k];
    double even = 0, odd = 0, res = 0, nrm = 0;
    for (int i = 0; i < grid.N; ++i) {
      const int j = grid.N - 1 - i;
      even += (row[i] - row[j]) * (row[i] - row[j]);
      odd += (row[i] + row[j]) * (row[i] + row[j]);
    }
    s.parity[k] = even <= odd ? +1 : -1;
    if (s.parity[k] != ((k % 2 == 0) ? +1 : -1))
      throw std::runtime_error("spectrum: parity does not alternate with mode index");
    const double h2 = grid.h * grid.h;
    for (int i = 1; i + 1 < grid.N; ++i) {
      const double qrow = (-row[i - 1] + 2.0 * row[i] - row[i + 1]) / h2 +
                          potential(q, grid.x(i)) * row[i];
      const double r = qrow - s.mu_fine[k] * row[i];
      res += r * r;
      nrm += row[i] * row[i];
    }
    s.residual[k] = std::sqrt(res / nrm) / s.mu_fine[k];
    if (s.residual[k] > residual_tol)
      throw std::runtime_error("spectrum: eigen-residual above tolerance for mode " +
                               std::to_string(k));
  }
  if (!(std::abs(s.phi0_at_zero()) > 0))
    throw std::runtime_error("spectrum: ground state vanishes at x=0");
  // ground state nodeless on the interior
  {
    const auto& g = s.phi[0];
    bool pos = false, neg = false;
    for (int i = 1; i + 1 < grid.N; ++i) {
      if (g[i] > 1e-9) pos = true;
      if (g[i] < -1e-9) neg = true;
    }
    if (pos && neg) throw std::runtime_error("spectrum: ground state changes sign");
  }
  return s;
}

Spectrum solve_eigenpairs_hermite(int q, int K, const XGrid& grid, int basis_size,
                                  double residual_tol) {
  const int nev = K + 1;
  const int m = q - 1;
  const int margin = 2 * m + 2;
  const int M = basis_size + margin;
  // position operator in the Hermite-function basis
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(M, M);
  for (int nidx = 0; nidx + 1 < M; ++nidx) {
    const double v = std::sqrt((nidx + 1) / 2.0);
    S(nidx, nidx + 1) = v;
    S(nidx + 1, nidx) = v;
  }
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(M, M);
  for (int p = 0; p < 2 * m; ++p) V = S * V;
  // kinetic part -d^2/dx^2
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(M, M);
  for (int nidx = 0; nidx < M; ++nidx) T(nidx, nidx) = (2.0 * nidx + 1.0) / 2.0;
  for (int nidx = 0; nidx + 2 < M; ++nidx) {
    const double v = -std::sqrt(double(nidx + 1) * (nidx + 2)) / 2.0;
    T(nidx, nidx + 2) = v;
    T(nidx + 2, nidx) = v;
  }
  Eigen::MatrixXd H =
      (T + V).topLeftCorner(basis_size, basis_size);  // elements there are exact
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectrum(hermite): eigensolve failed");

  Spectrum s;
  s.q = q;
  s.K = K;
  s.grid = grid;
  s.mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + nev);
  s.mu_fine = s.mu;
  s.richardson_delta.assign(nev, 0.0);

  // sample Hermite functions on the grid (stable upward recurrence)
  Eigen::MatrixXd basis(basis_size, grid.N);
  for (int i = 0; i < grid.N; ++i) {
    const double x = grid.x(i);
    double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    double h1 = std::sqrt(2.0) * x * h0;
    basis(0, i) = h0;
    if (basis_size > 1) basis(1, i) = h1;
    for (int nidx = 2; nidx < basis_size; ++nidx) {
      const double hn = std::sqrt(2.0 / nidx) * x * h1 - std::sqrt((nidx - 1.0) / nidx) * h0;
      basis(nidx, i) = hn;
      h0 = h1;
      h1 = hn;
    }
  }
  s.phi.assign(nev, std::vector<double>(grid.N, 0.0));
  s.parity.resize(nev);
  s.residual.assign(nev, 0.0);
  for (int k = 0; k < nev; ++k) {
    Eigen::VectorXd c = es.eigenvectors().col(k);
    Eigen::VectorXd row = basis.transpose() * c;
    // trapezoid normalization
    double nrm = 0;
    for (int i = 0; i < grid.N; ++i) {
      const double wgt = (i == 0 || i == grid.N - 1) ? 0.5 : 1.0;
      nrm += wgt * row(i) * row(i) * grid.h;
    }
    row /= std::sqrt(nrm);
    double amax = row.cwiseAbs().maxCoeff();
    for (int i = grid.center() + 1; i < grid.N; ++i) {
      if (std::abs(row(i)) >= 0.5 * amax) {
        if (row(i) < 0) row = -row;
        break;
      }
    }
    for (int i = 0; i < grid.N; ++i) s.phi[k][i] = row(i);
    s.parity[k] = (k % 2 == 0) ? +1 : -1;
    // residual in the basis representation
    Eigen::VectorXd r = H * c - s.mu[k] * c;
    s.residual[k] = r.norm() / s.mu[k];
    if (s.residual[k] > residual_tol)
      throw std::runtime_error("spectrum(hermite): residual above tolerance for mode " +
                               std::to_string(k));
  }
  return s;
}

std::vector<cdouble> apply_Q_power(const Spectrum& spec, double nu,
                                   const std::vector<cdouble>& coeffs) {
  if (nu < -1.0)
    throw std::invalid_argument("apply_Q_power: nu >= -1 required");
  std::vector<cdouble> out(coeffs.size());
  for (size_t k = 0; k < coeffs.size(); ++k)
    out[k] = coeffs[k] * std::pow(spec.mu.at(k), nu);
  return out;
}

namespace {

double trapezoid_inner(const XGrid& g, const std::vector<double>& f1,
                       const std::vector<double>& f2) {
  double acc = 0;
  for (int i = 0; i < g.N; ++i) {
    const double w = (i == 0 || i == g.N - 1) ? 0.5 : 1.0;
    acc += w * f1[i] * f2[i];
  }
  return acc * g.h;
}

}  // namespace

Eigen::MatrixXd coupling_matrix(const Spectrum& spec, CouplingKind kind, int beta, int alpha,
                                double nu) {
  const int n = spec.K + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const XGrid& g = spec.grid;
  if (kind == CouplingKind::QPower) {
    for (int k = 0; k < n; ++k) M(k, k) = std::pow(spec.mu[k], nu);
    return M;
  }
  if (kind == CouplingKind::XDx) {
    // x d_x = skew(x d_x) - 1/2; assemble the skew part explicitly so that
    // M + M^T = -Gram holds to machine precision.
    UniformStencil d1(1, 4, g.h);
    std::vector<std::vector<double>> xdphi(n);
    for (int k = 0; k < n; ++k) {
      auto der = d1.apply(spec.phi[k]);
      for (int i = 0; i < g.N; ++i) der[i] *= g.x(i);
      xdphi[k] = std::move(der);
    }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        if ((k + l) % 2 != 0) continue;  // parity selection
        const double skl = trapezoid_inner(g, xdphi[l], spec.phi[k]);
        M(k, l) += 0.5 * skl;
        M(l, k) -= 0.5 * skl;
      }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if ((k + l) % 2 == 0)
          M(k, l) -= 0.5 * trapezoid_inner(g, spec.phi[l], spec.phi[k]);
    return M;
  }
  // x^beta d^alpha
  if (alpha > 4)
    throw std::invalid_argument("coupling_matrix: derivative order exceeds stencil budget");
  std::vector<std::vector<double>> op(n);
  for (int k = 0; k < n; ++k) {
    std::vector<double> v = spec.phi[k];
    if (alpha > 0) {
      UniformStencil d(alpha, 4, g.h);
      v = d.apply(v);
    }
    for (int i = 0; i < g.N; ++i) v[i] *= std::pow(g.x(i), beta);
    op[k] = std::move(v);
  }
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) M(k, l) = trapezoid_inner(g, op[l], spec.phi[k]);
  return M;
}

namespace {

template <typename T>
double mixed_norm(const XGrid& grid, const std::vector<T>& u, int alpha, int beta) {
  if (alpha < 0 || beta < 0) throw std::invalid_argument("anisotropic_norm: negative order");
  if (alpha > 4)
    throw std::invalid_argument("anisotropic_norm: derivative order exceeds stencil budget");
  std::vector<T> v = u;
  if (alpha > 0) {
    UniformStencil d(alpha, 4, grid.h);
    v = d.apply(v);
  }
  double acc = 0;
  for (int i = 0; i < grid.N; ++i) {
    const double w = (i == 0 || i == grid.N - 1) ? 0.5 : 1.0;
    const double amp = std::abs(v[i]) * std::pow(std::abs(grid.x(i)), beta);
    acc += w * amp * amp;
  }
  return std::sqrt(acc * grid.h);
}

}  // namespace

double anisotropic_norm(const XGrid& grid, const std::vector<double>& u, int alpha, int beta) {
  return mixed_norm(grid, u, alpha, beta);
}
double anisotropic_norm(const XGrid& grid, const std::vector<cdouble>& u, int alpha,
                        int beta) {
  return mixed_norm(grid, u, alpha, beta);
}

double anisotropic_k_norm(const XGrid& grid, const std::vector<double>& u, int k, int q) {
  double best = 0;
  for (int alpha = 0; alpha <= k && alpha <= 4; ++alpha) {
    const int beta_max = (k - alpha) * (q - 1);
    for (int beta = 0; beta <= beta_max; ++beta)
      best = std::max(best, anisotropic_norm(grid, u, alpha, beta));
  }
  return best;
}

double bracket_weight(const std::vector<int>& word, int q) {
  int plus = 0, minus = 0;
  for (int c : word) {
    if (c == +1)
      ++plus;
    else if (c == -1)
      ++minus;
    else
      throw std::invalid_argument("bracket_weight: word entries must be +-1");
  }
  return plus + double(minus) / (q - 1);
}

GrowthFit derivative_growth_fit(const Spectrum& spec, int alpha_max) {
  if (alpha_max < 4)
    throw std::invalid_argument("derivative_growth_fit: insufficient range (alpha_max >= 4)");
  const int n = spec.K + 1;
  // skew-symmetrized derivative coupling <phi_l', phi_k>
  UniformStencil d1(1, 4, spec.grid.h);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::vector<double>> dphi(n);
  for (int k = 0; k < n; ++k) dphi[k] = d1.apply(spec.phi[k]);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if ((k + l) % 2 == 0) continue;  // derivative flips parity
      const double v = trapezoid_inner(spec.grid, dphi[l], spec.phi[k]);
      D(k, l) += 0.5 * v;
      D(l, k) -= 0.5 * v;
    }
  GrowthFit out;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c(0) = 1.0;
  Eigen::MatrixXd phim(n, spec.grid.N);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < spec.grid.N; ++i) phim(k, i) = spec.phi[k][i];
  int used = alpha_max;
  for (int alpha = 0; alpha <= alpha_max; ++alpha) {
    Eigen::VectorXd vals = phim.transpose() * c;
    out.sup_derivs.push_back(vals.cwiseAbs().maxCoeff());
    // truncation monitor: energy reaching the top retained modes means the
    // expansion of d^alpha phi0 no longer fits in the basis
    const double tail = std::abs(c(n - 1)) + std::abs(c(n - 2));
    if (tail > 1e-3 * c.cwiseAbs().maxCoeff() && alpha < alpha_max) {
      out.noise_warning = true;
      used = std::max(4, alpha);
      break;
    }
    c = D * c;
  }
  out.alpha_used = std::min<int>(used, static_cast<int>(out.sup_derivs.size()) - 1);
  // slope of log sup against alpha log alpha, taken in difference form so the
  // geometric C^alpha factor drops out exactly:
  //   d log sup / d (alpha log alpha) -> s
  std::vector<double> xs, ys;
  for (int alpha = 2; alpha < out.alpha_used; ++alpha) {
    const double dx =
        (alpha + 1.0) * std::log(alpha + 1.0) - alpha * std::log(double(alpha));
    xs.push_back(dx);
    ys.push_back(std::log(out.sup_derivs[alpha + 1]) - std::log(out.sup_derivs[alpha]));
  }
  LineFit f = fit_line(xs, ys);
  out.order = f.slope;
  return out;
}

std::vector<double> project_coeffs(const Spectrum& spec, const std::vector<double>& f) {
  std::vector<double> c(spec.K + 1);
  for (int k = 0; k <= spec.K; ++k) c[k] = trapezoid_inner(spec.grid, f, spec.phi[k]);
  return c;
}

}  // namespace gevrey
