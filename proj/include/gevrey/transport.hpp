#pragma once

#include "gevrey/fdweights.hpp"
#include "gevrey/model.hpp"
#include "gevrey/ode_inverse.hpp"
#include "gevrey/spectrum.hpp"

#include <Eigen/Dense>

#include <vector>

namespace gevrey {

// One term of the series: u_j(x, rho) = sum_k c(k, i) phi_k(x) at rho_i.
// Row 0 is the pi-component; rows 1..K the complement.
struct EigenCoeffField {
  int j = 0;
  Eigen::MatrixXcd c;        // (K+1) x n_rho
  double valid_from = 0;     // 3 R0 (j+1); values below are not asserted
  DecayEnvelope envelope;
};

struct DecayReport {
  int j = 0;
  double measured_exponent = 0;
  double target_exponent = 0;  // -(j - delta) kappa
  double window_lo = 0, window_hi = 0;
  double fit_rms = 0;
};

struct TransportResiduals {
  int j = 0;
  double tr1 = 0;  // off-diagonal equation, relative sup over the window
  double tr2 = 0;  // diagonal equation
};

struct TransportContext {
  const Spectrum* spec = nullptr;
  const RhoGrid* rho = nullptr;
  ModelParams params;
  TransportOperators ops;
  Eigen::MatrixXcd X;               // x d_x coupling in the eigenbasis
  std::vector<RootSystem> roots;    // per mode 0..K
  std::vector<cdouble> tail_freqs;  // resonant frequencies for tail fits
  double residual_tol = 1e-4;
  double window_hi_frac = 0.75;     // fits and checks stop at this fraction of rho_max
  int threads = 1;

  int K() const { return spec->K; }
  int two_a() const { return params.two_a(); }
  double ode_scale() const {  // (-1)^a s0^{2a}
    return (params.a % 2 == 0 ? 1.0 : -1.0) * std::pow(params.s0_d, params.two_a());
  }
};

TransportContext make_transport_context(const Spectrum& spec, const RhoGrid& rho,
                                        const ModelParams& params,
                                        const TransportOperators& ops, double residual_tol,
                                        int threads);

// Row-wise rho-derivative of a coefficient block.
Eigen::MatrixXcd d_rho(const RhoGrid& g, const Eigen::MatrixXcd& m, int order,
                       int accuracy = 4);

// P_j u = Ptilde_j(X) d_rho^{2a-j} u for j >= 1.
Eigen::MatrixXcd apply_Pk(const TransportContext& ctx, int j, const Eigen::MatrixXcd& field,
                          int accuracy = 4);

// P_0 u: mode k sees mu_k + (-1)^a s0^{-2a} d_rho^{2a}.
Eigen::MatrixXcd apply_P0(const TransportContext& ctx, const Eigen::MatrixXcd& field,
                          int accuracy = 4);

EigenCoeffField init_u0(const TransportContext& ctx);

struct LevelSolution {
  EigenCoeffField field;
  Eigen::MatrixXcd rhs_offdiag;  // target of P0 (1-pi) u_j
  Eigen::VectorXcd rhs_diag;     // target of P0 pi u_j (mode-0 row)
  TransportResiduals residuals;
  std::vector<double> residual_profile;  // per-node relative residual (0 off-window)
};

// Rows 1..K from the off-diagonal transport equation.
Eigen::MatrixXcd solve_offdiagonal(const TransportContext& ctx, int j,
                                   const std::vector<EigenCoeffField>& history,
                                   Eigen::MatrixXcd* rhs_out);

// Row 0 from the diagonal equation; consumes the freshly solved off-diagonal
// block. The pi P1 pi source is identically absent (the choice of r kills it).
Eigen::VectorXcd solve_diagonal(const TransportContext& ctx, int j,
                                const Eigen::MatrixXcd& offdiag,
                                const std::vector<EigenCoeffField>& history,
                                Eigen::VectorXcd* rhs_out);

LevelSolution solve_uj(const TransportContext& ctx, int j,
                       const std::vector<EigenCoeffField>& history);

DecayReport measure_decay(const TransportContext& ctx, const EigenCoeffField& field);

// Aggregate transport identity across all computed levels on the common window.
double telescope_residual(const TransportContext& ctx,
                          const std::vector<EigenCoeffField>& fields);

// |(Ptilde_1(X))_{00}| relative to the row magnitude; zero by the choice of r.
double pi_p1_pi_magnitude(const TransportContext& ctx);

// sup of the mode-0 row of P1 u0 relative to the full P1 u0 block.
double pi_p1_u0_magnitude(const TransportContext& ctx, const EigenCoeffField& u0);

struct TransportRun {
  std::vector<EigenCoeffField> fields;
  std::vector<TransportResiduals> residuals;
  std::vector<std::vector<double>> residual_profiles;  // per level j >= 1
  std::vector<DecayReport> decay;
  double telescope = 0;
};

TransportRun run_transport(const TransportContext& ctx, int J);

}  // namespace gevrey
