#pragma once

#include "gevrey/rational.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gevrey {

using cdouble = std::complex<double>;

// Gevrey index from the operator exponents: 1/s0 = 1 - (q-1)/(a q).
Rational compute_s0(int q, int a);

// Coefficients of the collected form of the m-fold first-order operator
//   L = d_rho ( (i s0)^{-1} rho^{1-s0} . ),
//   L^m = sum_h gamma_{m,h} rho^{-(m s0 - h)} d_rho^h.
// All entries are exact complex rationals in i and s0.
struct GammaTable {
  int a = 0;
  Rational s0;
  // entries[m][h], 0 <= h <= m <= 2a
  std::vector<std::vector<CRational>> entries;

  const CRational& at(int m, int h) const { return entries.at(m).at(h); }
  cdouble value(int m, int h) const { return entries.at(m).at(h).to_complex(); }
};

GammaTable compute_gamma_table(int a, const Rational& s0);

// Falling-factorial Pochhammer: (lambda)_0 = 1, (lambda)_b = lambda (lambda-1) ... (lambda-b+1).
cdouble pochhammer(cdouble lambda, int beta);
CRational pochhammer_exact(const CRational& lambda, int beta);

// Expansion in t = x d_x of the operator product prod_{m=0}^{k-1} ((s0/q) t - m).
// p_0 = [1]; constant coefficient vanishes for k >= 1.
std::vector<Rational> build_pk_polynomial(int k, const Rational& s0, int q);

// One transport symbol: P_j = Ptilde_j(x d_x) d_rho^{2a-j}, j = 1..2a.
struct TransportSymbol {
  int j = 0;
  int rho_order = 0;                 // 2a - j
  std::vector<CRational> poly;       // Ptilde_j coefficients in t = x d_x, degree <= j
  std::vector<cdouble> poly_d;       // same, rounded at the module boundary
};

// The j = 0 operator is kept in its structural form Q + s0^{-2a} D_rho^{2a}
// rather than as a polynomial: mode k sees mu_k + (-1)^a s0^{-2a} d_rho^{2a}.
struct P0Form {
  int order = 0;            // 2a
  Rational s0_pow_neg2a;    // s0^{-2a}
  double coeff_d = 0;       // (-1)^a s0^{-2a}, the d_rho^{2a} coefficient
};

struct TransportOperators {
  P0Form p0;
  std::vector<TransportSymbol> pj;  // index 0 -> j=1, ..., index 2a-1 -> j=2a
  const TransportSymbol& symbol(int j) const { return pj.at(j - 1); }
};

// Assemble every Ptilde_j from the double sum over (h, alpha) with exact
// arithmetic. r enters through the Pochhammer factor; it must already be fixed.
TransportOperators build_transport_symbols(int q, int a, const Rational& s0,
                                           const GammaTable& gamma, const CRational& r);

// Root of the resonance condition <P1 u0, phi0> = 0:
//   alpha <x d_x phi0, phi0> + beta + 2a gamma_{2a} r = 0,
// with alpha, beta read off the r-free decomposition of P1. The pairing is
// supplied by the spectrum module (analytically -1/2) and is converted to an
// exact rational, so the returned r is exact.
CRational choose_r(int q, int a, const Rational& s0, const GammaTable& gamma,
                   double ground_state_pairing);

struct Weights {
  double delta = 0;
  double kappa = 0;
  double eps_mu = 0;
  double R0 = 0;
  int gamma_sharp = 0;
};

// delta = 0.9, kappa = max(0.62, (1 + 1/s0)/2), eps_mu = half the minimal
// nonzero |Re mu_kj - mu0_tilde| over all computed modes, gamma_sharp = 2a+2.
Weights select_weights(int q, int a, int K_modes,
                       const std::vector<std::vector<cdouble>>& roots_per_mode,
                       double mu0_tilde, double R0_default,
                       std::optional<double> delta_override = std::nullopt,
                       std::optional<double> kappa_override = std::nullopt);

// The fully derived problem instance.
struct ModelParams {
  int q = 0;
  int a = 0;
  Rational s0;
  double s0_d = 0;
  CRational r;
  cdouble r_d;
  cdouble mu0_star;      // selected ground-mode root
  double mu0_tilde = 0;  // Re mu0_star, < 0
  double eps_mu = 0;
  double delta = 0;
  double kappa = 0;
  double R0 = 0;
  int gamma_sharp = 0;

  int two_a() const { return 2 * a; }
  void validate() const;  // throws with the violated constraint named
};

}  // namespace gevrey
