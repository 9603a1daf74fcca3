#pragma once

#include "gevrey/quadrature.hpp"
#include "gevrey/transport.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace gevrey {

// Smooth switches psi_j: 0 below 3 R0 (j+1), 1 above 6 R0 (j+1), built by
// mollifying a step with a compact bump (iterated convolution on the grid).
struct CutoffFamily {
  Eigen::MatrixXd psi;  // (J+1) x n_rho
  int J = 0;
  double psi_at(int j, double rho, const RhoGrid& g) const;
};

CutoffFamily build_cutoffs(const ModelParams& params, int J, const RhoGrid& rho);

struct WitnessFunction {
  Eigen::MatrixXcd c;  // mode coefficients of v = sum psi_j u_j
  int J = 0;
  double dominance_ratio = 0;  // mode-0 tail sum over the leading term
};

WitnessFunction assemble_v(const TransportContext& ctx, const CutoffFamily& cutoffs,
                           const std::vector<EigenCoeffField>& fields);

// d_x^beta v(0, rho) on the rho grid (beta = 0 or 1).
std::vector<cdouble> witness_at_zero(const TransportContext& ctx, const WitnessFunction& w,
                                     int beta);

// beta = 0 when phi0(0) != 0 (always, by parity), else 1.
int select_beta(const Spectrum& spec);

// Oscillatory profile integral A(v)(x, y) = int e^{i y rho^{s0}} rho^r
// v(x rho^{s0/q}, rho) drho, evaluated after the uniform-phase substitution
// eta = rho^{s0} with a product rule exact for cubic amplitude per interval.
class ProfileIntegral {
 public:
  ProfileIntegral(const TransportContext& ctx, const WitnessFunction& w, int beta);

  // fast path along x = 0 (uses d_x^beta v(0, .))
  cdouble at_zero(double y) const;
  // general x (interpolates the dilated mode sum); slower
  cdouble at(double x, double y) const;

  double eta_cut() const { return eta_[n_used_ - 1]; }

 private:
  const TransportContext* ctx_;
  const WitnessFunction* w_;
  int beta_ = 0;
  std::vector<double> eta_;       // uniform grid in eta = rho^{s0}
  std::vector<cdouble> g_;        // integrand amplitude at eta nodes
  std::vector<std::array<cdouble, kAmpOrder>> a_;  // amplitude coefficients per interval
  int n_used_ = 0;
  double deta_ = 0;

  cdouble integrate(double y, const std::vector<std::array<cdouble, kAmpOrder>>& a) const;
};

struct FourierProfile {
  std::vector<double> eta;
  std::vector<cdouble> closed_form;
  std::vector<cdouble> numeric;      // empty unless the crosscheck ran
  std::vector<double> numeric_err;   // relative |numeric - closed| / |closed|
  std::vector<double> certificate;   // |F| e^{|mu0~| eta^{1/s0}} eta^{-lambda'}
  double lambda_prime = 0;
  int beta = 0;
};

// Exact-formula Fourier transform along eta (the uniform-phase image of v).
FourierProfile closed_form_fourier(const TransportContext& ctx, const WitnessFunction& w,
                                   int beta, const std::vector<double>& eta_grid);

struct CrosscheckOptions {
  double rel_tol = 0.05;
  int min_samples = 12;
  int threads = 1;
};

// Windowed quadrature of int e^{-i y eta} A(v)(0, y) dy against the closed
// form. Fills profile.numeric / numeric_err at the sampled etas.
void numeric_fourier_crosscheck(const TransportContext& ctx, const ProfileIntegral& av,
                                FourierProfile& profile, const std::vector<double>& etas,
                                const CrosscheckOptions& opt);

struct GevreyFit {
  double slope = 0;       // estimates 1/s0
  double slope_ci = 0;
  double rate = 0;        // estimates |mu0_tilde|
  double rate_ci = 0;
  double fit_rms = 0;
};

GevreyFit gevrey_index_fit(const TransportContext& ctx, const FourierProfile& profile);

struct STermsReport {
  std::vector<double> band_lo, band_hi;      // per level j = 0..J
  std::vector<double> s1_band_sup, s2_band_sup;  // weighted by e^{|mu0~| rho}
  double f10_norm = 0;                       // |psi_0 P0 u0| relative
  double support_leak = 0;                   // S2 mass outside the bands
  double band_fit_c = 0;                     // band sup ~ exp(-c (j+1) log(j+1))
  double rholog_slope = 0;                   // log sup vs rho log rho
};

STermsReport compute_S_terms(const TransportContext& ctx, const CutoffFamily& cutoffs,
                             const std::vector<EigenCoeffField>& fields);

// Default analysis window [(6 R0)^{s0} * 1.2, (0.9 rho_max)^{s0}], geometric.
std::vector<double> default_eta_window(const TransportContext& ctx, int count);

}  // namespace gevrey
