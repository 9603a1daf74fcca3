#pragma once

#include "gevrey/grid.hpp"
#include "gevrey/rational.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace gevrey {

using cdouble = std::complex<double>;

// Asymptotic tail of a rho-sampled function beyond the grid:
//   f(sigma) ~ sigma^{-p} * sum_t c_t exp(nu_t (sigma - sigma_ref)).
// The frequencies are prescribed (the resonant ground-mode pair); p and the
// complex amplitudes are fitted on the last stretch of the grid.
struct TailModel {
  double p = 0;
  double sigma_ref = 0;
  std::vector<std::pair<cdouble, cdouble>> terms;  // (nu_t, c_t)
  double rel_residual = 0;

  bool empty() const { return terms.empty(); }
  cdouble eval(double sigma) const {
    if (terms.empty()) return {0.0, 0.0};
    cdouble acc = 0;
    for (const auto& [nu, c] : terms) acc += c * std::exp(nu * (sigma - sigma_ref));
    return acc * std::pow(sigma, -p);
  }
};

// Envelope tag |f| <~ c rho^{-beta} e^{mu rho}, kept as a reporting surface.
struct DecayEnvelope {
  double c = 0;
  double beta = 0;
  double mu = 0;
};

struct RhoGridFunction {
  const RhoGrid* grid = nullptr;
  std::vector<cdouble> v;
  std::optional<TailModel> tail;
  std::optional<DecayEnvelope> envelope;

  RhoGridFunction() = default;
  explicit RhoGridFunction(const RhoGrid& g) : grid(&g), v(g.n, cdouble{0.0, 0.0}) {}
};

// 2a-th roots of (-1)^{a+1} s0^{2a} mu_k, sorted by (Re, Im).
std::vector<cdouble> compute_roots(double mu_k, int a, double s0);

// Partial-fraction weights A_l = prod_{j != l} 1/(mu_l - mu_j).
std::vector<cdouble> compute_partial_fractions(const std::vector<cdouble>& roots);

// Dominant ground-mode root: largest real part among the negative-real-part
// roots; ties broken toward nonnegative imaginary part.
struct GroundRootChoice {
  cdouble mu0_star;
  double mu0_tilde;
};
GroundRootChoice select_mu0_star(const std::vector<cdouble>& roots0);

// Integration direction per root: +1 integrates over sigma > rho (future),
// -1 over (R, rho). Ground-mode roots on the resonant line join the future
// group; a near-resonant root for k > 0 signals an upstream bug.
struct RootClassification {
  std::vector<int> flags;
  std::vector<bool> resonant;
};
RootClassification classify_roots(const std::vector<cdouble>& roots, double mu0_tilde,
                                  double eps_mu, int k);

struct RootSystem {
  int k = 0;
  double mu_k = 0;
  std::vector<cdouble> roots;
  std::vector<cdouble> weights;  // partial fractions
  std::vector<int> flags;
  std::vector<bool> resonant;
};

RootSystem make_root_system(int k, double mu_k, int a, double s0, double mu0_tilde,
                            double eps_mu);

// Fit the tail model with the given frequencies on the trailing window of the
// grid (fraction of the span). Returns an empty model for negligible data.
TailModel fit_tail(const RhoGridFunction& f, const std::vector<cdouble>& freqs,
                   double window_frac = 0.2);

// One direction-split exponential kernel
//   flag +1: I(rho) = -int_rho^inf e^{mu (rho-sigma)} H(sigma-R) f(sigma) dsigma
//   flag -1: I(rho) = +int_R^rho  e^{mu (rho-sigma)} f(sigma) dsigma
// computed by product quadrature, exact per interval for cubic f. Future
// integrals continue f beyond the grid with its tail model; a resonant root
// with no usable tail is an error.
RhoGridFunction apply_Ikj(cdouble root, int flag, bool resonant, const RhoGridFunction& f,
                          double R, double mu0_tilde);

// Mode-wise inverse E_k(f) = sum_j A_kj I_kj(f).
RhoGridFunction apply_Ek(const RootSystem& rs, const RhoGridFunction& f, double R,
                         double mu0_tilde);

}  // namespace gevrey
