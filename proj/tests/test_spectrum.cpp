#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gevrey/spectrum.hpp"

#include <cmath>
#include <numbers>

using namespace gevrey;

namespace {

XGrid harmonic_grid() { return XGrid(11.0, 4401); }

const Spectrum& harmonic_spec() {
  static Spectrum s = solve_eigenpairs(2, 16, harmonic_grid());
  return s;
}

}  // namespace

TEST_CASE("harmonic oscillator eigenvalues 2k+1 after Richardson") {
  const Spectrum& s = harmonic_spec();
  for (int k = 0; k <= 9; ++k)
    CHECK(std::abs(s.mu[k] - (2.0 * k + 1.0)) < 1e-8);
  for (int k = 0; k < s.K; ++k) CHECK(s.mu[k + 1] > s.mu[k]);  // simplicity
}

TEST_CASE("orthonormality and residuals") {
  const Spectrum& s = harmonic_spec();
  const XGrid& g = s.grid;
  for (int k = 0; k <= s.K; ++k) {
    for (int l = k; l <= s.K; ++l) {
      double acc = 0;
      for (int i = 0; i < g.N; ++i) {
        const double w = (i == 0 || i == g.N - 1) ? 0.5 : 1.0;
        acc += w * s.phi[k][i] * s.phi[l][i] * g.h;
      }
      CHECK(std::abs(acc - (k == l ? 1.0 : 0.0)) < 1e-10);
    }
    CHECK(s.residual[k] < 1e-6);
  }
  CHECK(s.parity[0] == 1);
  CHECK(s.phi0_at_zero() > 0.1);
}

TEST_CASE("quartic oscillator: self-convergence and Hermite-Galerkin crosscheck") {
  XGrid g(6.0, 2401);
  Spectrum fd = solve_eigenpairs(3, 8, g);
  CHECK(fd.richardson_delta[0] < 1e-4);
  XGrid g2(6.0, 4801);
  Spectrum fd2 = solve_eigenpairs(3, 8, g2);
  CHECK(std::abs(fd.mu[0] - fd2.mu[0]) < 1e-7);
  Spectrum hg = solve_eigenpairs_hermite(3, 8, g, 300);
  for (int k = 0; k <= 8; ++k)
    CHECK(std::abs(fd.mu[k] - hg.mu[k]) < 1e-6 * hg.mu[k]);
}

TEST_CASE("domain-truncation insensitivity of the ground eigenvalue") {
  XGrid g1(8.0, 3201);
  XGrid g2(10.0, 4001);
  Spectrum a = solve_eigenpairs(2, 4, g1);
  Spectrum b = solve_eigenpairs(2, 4, g2);
  CHECK(std::abs(a.mu[0] - b.mu[0]) < 1e-8);
}

TEST_CASE("Q powers: identity, harmonic value, semigroup") {
  const Spectrum& s = harmonic_spec();
  std::vector<cdouble> e0(s.K + 1, 0.0);
  e0[0] = 1.0;
  auto id = apply_Q_power(s, 0.0, e0);
  CHECK(std::abs(id[0] - cdouble(1, 0)) < 1e-15);
  auto q1 = apply_Q_power(s, 1.0, e0);
  CHECK(std::abs(q1[0] - cdouble(s.mu[0], 0)) < 1e-15);
  std::vector<cdouble> v(s.K + 1);
  for (int k = 0; k <= s.K; ++k) v[k] = cdouble(1.0 / (k + 1.0), 0.1 * k);
  auto twice = apply_Q_power(s, 0.5, apply_Q_power(s, 0.5, v));
  auto once = apply_Q_power(s, 1.0, v);
  for (int k = 0; k <= s.K; ++k) CHECK(std::abs(twice[k] - once[k]) < 1e-12 * s.mu[k]);
  CHECK_THROWS(apply_Q_power(s, -1.5, v));
}

TEST_CASE("x d_x coupling: pairing, antisymmetry, parity selection") {
  const Spectrum& s = harmonic_spec();
  Eigen::MatrixXd M = coupling_matrix(s, CouplingKind::XDx);
  CHECK(std::abs(M(0, 0) + 0.5) < 1e-10);
  Eigen::MatrixXd sym = M + M.transpose() + Eigen::MatrixXd::Identity(s.K + 1, s.K + 1);
  CHECK(sym.cwiseAbs().maxCoeff() < 1e-8);
  for (int k = 0; k <= s.K; ++k)
    for (int l = 0; l <= s.K; ++l)
      if ((k + l) % 2 == 1) CHECK(M(k, l) == 0.0);
  // harmonic ladder oracle: x d_x couples k and k+-2 only
  for (int k = 0; k + 4 <= s.K; ++k) CHECK(std::abs(M(k, k + 4)) < 5e-4);  // O(h^2) grid error
}

TEST_CASE("Q^nu coupling matrix is diagonal") {
  const Spectrum& s = harmonic_spec();
  Eigen::MatrixXd M = coupling_matrix(s, CouplingKind::QPower, 0, 0, 0.5);
  for (int k = 0; k <= s.K; ++k)
    for (int l = 0; l <= s.K; ++l) {
      if (k == l)
        CHECK(M(k, k) == doctest::Approx(std::sqrt(s.mu[k])).epsilon(1e-12));
      else
        CHECK(std::abs(M(k, l)) < 1e-9);
    }
}

TEST_CASE("anisotropic norms") {
  const Spectrum& s = harmonic_spec();
  CHECK(anisotropic_norm(s.grid, s.phi[0], 0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  // <Q phi0, phi0> = ||d phi0||^2 + ||x phi0||^2 = mu0 = 1
  const double d = anisotropic_norm(s.grid, s.phi[0], 1, 0);
  const double x = anisotropic_norm(s.grid, s.phi[0], 0, 1);
  CHECK(d * d + x * x == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS(anisotropic_norm(s.grid, s.phi[0], 5, 0));
  CHECK(anisotropic_k_norm(s.grid, s.phi[0], 1, 2) >= 1.0 - 1e-10);
}

TEST_CASE("bracket weight arithmetic") {
  // q=3, word (-,-,+): 1 + 2/2 = 2
  CHECK(bracket_weight({-1, -1, +1}, 3) == doctest::Approx(2.0));
  CHECK(bracket_weight({+1, +1}, 2) == doctest::Approx(2.0));
  CHECK_THROWS(bracket_weight({0}, 2));
}

TEST_CASE("ground-state derivative growth: Gevrey order (q-1)/q") {
  {
    const Spectrum& s = harmonic_spec();
    GrowthFit f = derivative_growth_fit(s, 12);
    CHECK(std::abs(f.order - 0.5) < 0.1);
    // Hermite closed-form oracle: d^n phi0 = (-1)^n He_n(x) phi0 (probabilists')
    const XGrid& g = s.grid;
    for (int n = 1; n <= 4; ++n) {
      double sup = 0;
      for (int i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        double h0 = 1.0, h1 = x;
        for (int m = 2; m <= n; ++m) {
          const double h2 = x * h1 - (m - 1) * h0;
          h0 = h1;
          h1 = h2;
        }
        sup = std::max(sup, std::abs(h1) * std::pow(std::numbers::pi, -0.25) *
                                std::exp(-0.5 * x * x));
      }
      CHECK(f.sup_derivs[n] == doctest::Approx(sup).epsilon(2e-3));
    }
  }
  {
    XGrid g(6.0, 2401);
    Spectrum s = solve_eigenpairs(3, 24, g);
    GrowthFit f = derivative_growth_fit(s, 12);
    CHECK(std::abs(f.order - 2.0 / 3.0) < 0.1);
  }
  CHECK_THROWS(derivative_growth_fit(harmonic_spec(), 3));
}

TEST_CASE("completeness proxy: Gaussian projection error decreases in K") {
  const Spectrum& s = harmonic_spec();
  const XGrid& g = s.grid;
  std::vector<double> gauss(g.N);
  for (int i = 0; i < g.N; ++i)
    gauss[i] = std::exp(-0.8 * g.x(i) * g.x(i)) * (1.0 + 0.3 * g.x(i) * g.x(i));
  auto c = project_coeffs(s, gauss);
  double prev = 1e300;
  for (int K : {2, 6, 10, 14}) {
    std::vector<double> recon(g.N, 0.0);
    for (int k = 0; k <= K; ++k)
      for (int i = 0; i < g.N; ++i) recon[i] += c[k] * s.phi[k][i];
    double err = 0;
    for (int i = 0; i < g.N; ++i) {
      const double w = (i == 0 || i == g.N - 1) ? 0.5 : 1.0;
      err += w * (gauss[i] - recon[i]) * (gauss[i] - recon[i]) * g.h;
    }
    err = std::sqrt(err);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("grid and domain guards") {
  CHECK_THROWS(XGrid(10.0, 4000));                          // even N
  CHECK_THROWS(solve_eigenpairs(2, 16, XGrid(3.0, 1201)));  // potential below mu_K
}
