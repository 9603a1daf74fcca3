#pragma once

#include "gevrey/grid.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace gevrey {

using cdouble = std::complex<double>;

enum class SpectrumBackend { FiniteDifference, HermiteGalerkin };

// Eigenpairs of Q = D^2 + x^{2(q-1)} on the truncated symmetric grid.
struct Spectrum {
  int q = 0;
  int K = 0;
  XGrid grid;
  std::vector<double> mu;                 // Richardson-extrapolated eigenvalues
  std::vector<double> mu_fine;            // raw finest-grid eigenvalues
  std::vector<double> richardson_delta;   // |extrapolated - fine| per mode
  std::vector<std::vector<double>> phi;   // K+1 rows, L2-normalized with trapezoid weights
  std::vector<int> parity;                // +1 even, -1 odd
  std::vector<double> residual;           // ||Q phi - mu phi|| / mu (discrete operator)

  double phi0_at_zero() const { return phi.at(0).at(grid.center()); }
};

// WKB estimate of mu_k, used for grid validation and the default domain size.
double mu_estimate_wkb(int q, int k);

Spectrum solve_eigenpairs(int q, int K, const XGrid& grid, double residual_tol = 1e-6);

// Galerkin backend in the harmonic-oscillator (Hermite function) basis;
// exact banded matrix elements of x^{2(q-1)}, dense symmetric eigensolve.
Spectrum solve_eigenpairs_hermite(int q, int K, const XGrid& grid, int basis_size = 400,
                                  double residual_tol = 1e-4);

// Componentwise mu_k^nu on mode coefficients (spectral functional calculus).
std::vector<cdouble> apply_Q_power(const Spectrum& spec, double nu,
                                   const std::vector<cdouble>& coeffs);

enum class CouplingKind { XDx, MonomialDerivative, QPower };

// M_{k,l} = <Op phi_l, phi_k> with trapezoid quadrature. XDx is assembled in
// skew-symmetrized form so M + M^T = -Gram holds identically.
Eigen::MatrixXd coupling_matrix(const Spectrum& spec, CouplingKind kind, int beta = 0,
                                int alpha = 0, double nu = 0.0);

// || x^beta D^alpha u || on the grid (trapezoid). alpha bounded by the stencil budget.
double anisotropic_norm(const XGrid& grid, const std::vector<double>& u, int alpha, int beta);
double anisotropic_norm(const XGrid& grid, const std::vector<cdouble>& u, int alpha, int beta);

// ||u||_k = max over beta/(q-1) + alpha <= k of the mixed norms above.
double anisotropic_k_norm(const XGrid& grid, const std::vector<double>& u, int k, int q);

// <I> = |I_+| + |I_-|/(q-1) for a word in {+1 = derivative, -1 = multiplication}.
double bracket_weight(const std::vector<int>& word, int q);

struct GrowthFit {
  double order = 0;             // estimated Gevrey order of phi0
  std::vector<double> sup_derivs;  // sup |d^alpha phi0| for alpha = 0..alpha_max
  int alpha_used = 0;
  bool noise_warning = false;
};

// Least-squares slope of log sup|d^alpha phi0| against alpha log alpha
// (with alpha and constant nuisance columns), alpha = 2..alpha_max.
GrowthFit derivative_growth_fit(const Spectrum& spec, int alpha_max);

// L2 projection of grid samples onto the retained modes.
std::vector<double> project_coeffs(const Spectrum& spec, const std::vector<double>& f);

}  // namespace gevrey
