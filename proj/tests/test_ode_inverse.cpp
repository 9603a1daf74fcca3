#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gevrey/fdweights.hpp"
#include "gevrey/ode_inverse.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gevrey;

namespace {

// compactly supported polynomial bump on [c-w, c+w], C^7 at the edges
cdouble bump(double s, double c, double w) {
  const double t = (s - c) / w;
  if (std::abs(t) >= 1.0) return {0.0, 0.0};
  return {std::pow(1.0 - t * t, 8.0), 0.0};
}

// residual of (d^{2a} + (-1)^a s0^{2a} mu_k) u = f with an 8th-order stencil;
// the denominator takes the equation scale over the stencil halo so that
// nodes at a support edge (where everything crosses zero) are not divided by
// their own rounding noise
double ode_residual(const RhoGrid& g, int a, double s0, double mu_k,
                    const std::vector<cdouble>& u, const std::vector<cdouble>& f,
                    double lo, double hi) {
  UniformStencil st(2 * a, 8, g.h);
  auto du = st.apply(u);
  const double c = (a % 2 == 0 ? 1.0 : -1.0) * std::pow(s0, 2 * a) * mu_k;
  std::vector<double> scale(g.n, 0.0);
  for (int i = 0; i < g.n; ++i)
    scale[i] = std::max({std::abs(du[i]), std::abs(c * u[i]), std::abs(f[i])});
  const int halo = st.half + 2;
  double worst = 0;
  for (int i = g.index_at_or_above(lo); i < g.index_at_or_above(hi); ++i) {
    const cdouble res = du[i] + c * u[i] - f[i];
    double denom = 0;
    for (int j = std::max(0, i - halo); j <= std::min(g.n - 1, i + halo); ++j)
      denom = std::max(denom, scale[j]);
    if (denom < 1e-250) continue;
    worst = std::max(worst, std::abs(res) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("roots of the characteristic polynomial") {
  // a=1, s0=2: square roots of 4 mu
  auto r0 = compute_roots(1.0, 1, 2.0);
  CHECK(r0.size() == 2);
  CHECK(r0[0].real() == doctest::Approx(-2.0));
  CHECK(r0[1].real() == doctest::Approx(2.0));
  auto r1 = compute_roots(3.0, 1, 2.0);
  CHECK(r1[1].real() == doctest::Approx(2.0 * std::sqrt(3.0)));
  // a=2: vertices of a regular 4-gon, no purely imaginary root
  auto r2 = compute_roots(1.3, 2, 1.5);
  CHECK(r2.size() == 4);
  const double rad = std::pow(std::pow(1.5, 4) * 1.3, 0.25);
  for (const auto& z : r2) {
    CHECK(std::abs(std::abs(z) - rad) < 1e-12 * rad);
    CHECK(std::abs(z.real()) > 1e-6);
    CHECK(std::abs(std::abs(z.real()) - rad / std::sqrt(2.0)) < 1e-12 * rad);
  }
  // a=3: positive target, angles at multiples of pi/3
  auto r3 = compute_roots(2.0, 3, 1.2);
  CHECK(r3.size() == 6);
  for (const auto& z : r3) CHECK(std::abs(z.real()) > 1e-6);
}

TEST_CASE("partial fractions: two-point case and moment identities") {
  auto roots = compute_roots(1.0, 1, 2.0);  // {-2, 2}
  auto A = compute_partial_fractions(roots);
  CHECK(std::abs(A[0] - cdouble(-0.25, 0)) < 1e-14);
  CHECK(std::abs(A[1] - cdouble(0.25, 0)) < 1e-14);
  for (int a = 1; a <= 3; ++a) {
    for (double mu : {0.7, 3.1, 40.0}) {
      auto rr = compute_roots(mu, a, 1.5);
      auto AA = compute_partial_fractions(rr);  // throws if moments fail
      cdouble m0 = 0, mtop = 0;
      for (size_t i = 0; i < rr.size(); ++i) {
        m0 += AA[i];
        mtop += AA[i] * std::pow(rr[i], 2 * a - 1);
      }
      CHECK(std::abs(m0) < 1e-10);
      CHECK(std::abs(mtop - cdouble(1, 0)) < 1e-10);
    }
  }
}

TEST_CASE("ground root selection and tie-break") {
  auto g1 = select_mu0_star(compute_roots(1.0, 1, 2.0));
  CHECK(g1.mu0_tilde == doctest::Approx(-2.0));
  CHECK(g1.mu0_star.imag() == 0.0);
  auto g2 = select_mu0_star(compute_roots(1.06, 2, 1.5));
  CHECK(g2.mu0_star.imag() > 0.0);  // nonnegative-imaginary member of the pair
  CHECK(g2.mu0_tilde < 0.0);
  CHECK(g2.mu0_star.real() == doctest::Approx(g2.mu0_tilde));
}

TEST_CASE("root classification") {
  const double eps = 0.73;
  auto c0 = classify_roots(compute_roots(1.0, 1, 2.0), -2.0, eps, 0);
  CHECK(c0.flags == std::vector<int>{+1, +1});  // resonant root joins the future group
  CHECK(c0.resonant[0]);
  CHECK_FALSE(c0.resonant[1]);
  auto c1 = classify_roots(compute_roots(3.0, 1, 2.0), -2.0, eps, 1);
  CHECK(c1.flags == std::vector<int>{-1, +1});
  // a resonant root for k > 0 signals an upstream bug
  CHECK_THROWS(classify_roots({cdouble(-2.0, 0.1)}, -2.0, eps, 1));
}

TEST_CASE("kernels: zero input, closed-form exponential, derivative ladder") {
  RhoGrid g(2.0, 62.0, 0.02);
  const double mu0t = -2.0;
  RhoGridFunction zero(g);
  auto z = apply_Ikj(cdouble(3.0, 0.0), +1, false, zero, 2.0, mu0t);
  for (const auto& v : z.v) CHECK(std::abs(v) == 0.0);

  // f = e^{mu0t s}: future integral against a decaying kernel has the closed
  // form I(rho) = e^{mu0t rho}/(mu - mu0t)
  RhoGridFunction f(g);
  for (int i = 0; i < g.n; ++i) f.v[i] = std::exp(mu0t * g.rho(i));
  TailModel tm;
  tm.p = 0.0;
  tm.sigma_ref = g.rho_max();
  tm.terms = {{cdouble(mu0t, 0.0), std::exp(mu0t * g.rho_max())}};
  f.tail = tm;
  const cdouble mu(3.0, 0.5);
  auto I = apply_Ikj(mu, +1, false, f, 2.0, mu0t);
  // closed form (the future branch carries the leading minus):
  //   I(rho) = -int_rho^inf e^{mu(rho-s)} e^{mu0t s} ds = -e^{mu0t rho}/(mu - mu0t)
  for (int i = g.index_at_or_above(3.0); i < g.index_at_or_above(55.0); ++i) {
    const cdouble want = -std::exp(mu0t * g.rho(i)) / (mu - mu0t);
    CHECK(std::abs(I.v[i] - want) < 1e-6 * std::abs(want));
  }
  // derivative ladder d_rho I = mu I + f (sign: I = -J for the future branch)
  UniformStencil d1(1, 4, g.h);
  auto dI = d1.apply(I.v);
  for (int i = g.index_at_or_above(3.0); i < g.index_at_or_above(55.0); ++i) {
    const cdouble want = mu * I.v[i] + f.v[i];
    CHECK(std::abs(dI[i] - want) < 5e-7 * std::max(1e-300, std::abs(want)));
  }
}

TEST_CASE("resonant future integral with algebraic decay") {
  RhoGrid g(2.0, 82.0, 0.02);
  const double mu0t = -2.0;
  RhoGridFunction f(g);
  for (int i = 0; i < g.n; ++i)
    f.v[i] = std::exp(mu0t * g.rho(i)) * std::pow(g.rho(i), -2.0);
  std::vector<cdouble> freqs{cdouble(mu0t, 0.0)};
  f.tail = fit_tail(f, freqs);
  REQUIRE(f.tail.has_value());
  CHECK(std::abs(f.tail->p - 2.0) < 0.02);
  CHECK(f.tail->rel_residual < 1e-6);
  auto I = apply_Ikj(cdouble(mu0t, 0.0), +1, true, f, 2.0, mu0t);
  for (int i = g.index_at_or_above(4.0); i < g.index_at_or_above(70.0); ++i) {
    const double rho = g.rho(i);
    const cdouble want = -std::exp(mu0t * rho) / rho;  // -e^{mu0t rho} int s^-2
    CHECK(std::abs(I.v[i] - want) < 2e-5 * std::abs(want));
  }
  // a resonant future integral without a tail model must fail
  RhoGridFunction f2 = f;
  f2.tail.reset();
  CHECK_THROWS(apply_Ikj(cdouble(mu0t, 0.0), +1, true, f2, 2.0, mu0t));
}

TEST_CASE("tail fit recovers a two-frequency model") {
  RhoGrid g(2.0, 122.0, 0.02);
  const cdouble nu(-1.07, 1.07);
  RhoGridFunction f(g);
  for (int i = 0; i < g.n; ++i) {
    const double s = g.rho(i);
    f.v[i] = std::pow(s, -1.5) *
             (2.0 * std::exp(nu * s) + cdouble(0.3, 0.1) * std::exp(std::conj(nu) * s));
  }
  TailModel tm = fit_tail(f, {nu, std::conj(nu)});
  CHECK(std::abs(tm.p - 1.5) < 0.02);
  CHECK(tm.rel_residual < 1e-8);
  // the model stores amplitudes anchored at sigma_ref: c_t = 2 e^{nu sigma_ref}
  const cdouble c0 = tm.terms[0].second * std::exp(-nu * tm.sigma_ref);
  CHECK(std::abs(c0 - 2.0) < 1e-3);
}

TEST_CASE("mode inverse: residual, linearity, refinement") {
  std::mt19937 rng(98765);
  std::uniform_real_distribution<double> uc(10.0, 34.0), uw(2.0, 5.0);
  for (auto [a, s0] : {std::pair{1, 2.0}, {2, 1.5}}) {
    RhoGrid g(2.0, 62.0, 0.02);
    // a consistent ground system: mu0 = 1
    const double mu0t = select_mu0_star(compute_roots(1.0, a, s0)).mu0_tilde;
    const double eps = 0.25 * std::abs(mu0t);
    for (int trial = 0; trial < 5; ++trial) {
      const int k = trial % 3 == 0 ? 0 : trial * 3;
      const double mu_k = k == 0 ? 1.0 : 1.0 + 2.1 * k;
      RootSystem rs = make_root_system(k, mu_k, a, s0, mu0t, eps);
      RhoGridFunction f(g);
      const double c = uc(rng), w = uw(rng);
      for (int i = 0; i < g.n; ++i) f.v[i] = bump(g.rho(i), c, w);
      f.tail = fit_tail(f, {cdouble(mu0t, 0.0)});
      RhoGridFunction u = apply_Ek(rs, f, 2.0, mu0t);
      std::vector<cdouble> fv = f.v;
      const double res = ode_residual(g, a, s0, mu_k, u.v, fv, 3.0, 58.0);
      CHECK(res < 1e-6);
    }
    // linearity to round-off
    RootSystem rs = make_root_system(1, 3.0, a, s0, mu0t, eps);
    RhoGridFunction f1(g), f2(g);
    for (int i = 0; i < g.n; ++i) {
      f1.v[i] = bump(g.rho(i), 16.0, 3.0);
      f2.v[i] = bump(g.rho(i), 25.0, 4.0) * cdouble(0.4, 1.2);
    }
    f1.tail = fit_tail(f1, {cdouble(mu0t, 0.0)});
    f2.tail = fit_tail(f2, {cdouble(mu0t, 0.0)});
    RhoGridFunction fc(g);
    const cdouble alpha(2.0, -0.7);
    for (int i = 0; i < g.n; ++i) fc.v[i] = alpha * f1.v[i] + f2.v[i];
    fc.tail = fit_tail(fc, {cdouble(mu0t, 0.0)});
    auto u1 = apply_Ek(rs, f1, 2.0, mu0t);
    auto u2 = apply_Ek(rs, f2, 2.0, mu0t);
    auto uc2 = apply_Ek(rs, fc, 2.0, mu0t);
    double umax = 0;
    for (int i = 0; i < g.n; ++i) umax = std::max(umax, std::abs(uc2.v[i]));
    for (int i = 0; i < g.n; ++i)
      CHECK(std::abs(uc2.v[i] - (alpha * u1.v[i] + u2.v[i])) < 1e-12 * umax);
  }
  // refinement: halving h reduces the residual by at least 3
  {
    const int a = 1;
    const double s0 = 2.0;
    const double mu0t = -2.0;
    double res_coarse = 0, res_fine = 0;
    for (double h : {0.08, 0.04}) {
      RhoGrid g(2.0, 62.0, h);
      RootSystem rs = make_root_system(2, 5.0, a, s0, mu0t, 0.5);
      RhoGridFunction f(g);
      for (int i = 0; i < g.n; ++i) f.v[i] = bump(g.rho(i), 20.0, 6.0);
      f.tail = fit_tail(f, {cdouble(mu0t, 0.0)});
      auto u = apply_Ek(rs, f, 2.0, mu0t);
      const double res = ode_residual(g, a, s0, 5.0, u.v, f.v, 4.0, 58.0);
      if (h == 0.08)
        res_coarse = res;
      else
        res_fine = res;
    }
    CHECK(res_coarse / res_fine >= 3.0);
  }
}
