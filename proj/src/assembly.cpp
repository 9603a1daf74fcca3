#include "gevrey/assembly.hpp"

#include "gevrey/fit.hpp"
#include "gevrey/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace gevrey {

namespace {

void parallel_chunks(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n < 64) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int chunk = 256;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int lo = next.fetch_add(chunk);
        if (lo >= n) return;
        for (int i = lo; i < std::min(n, lo + chunk); ++i) fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

long binom_l(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double bessel_I0(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double CutoffFamily::psi_at(int j, double rho, const RhoGrid& g) const {
  std::vector<double> row(g.n);
  for (int i = 0; i < g.n; ++i) row[i] = psi(j, i);
  return interp_cubic(g, row, rho);
}

CutoffFamily build_cutoffs(const ModelParams& params, int J, const RhoGrid& rho) {
  CutoffFamily fam;
  fam.J = J;
  fam.psi = Eigen::MatrixXd::Zero(J + 1, rho.n);
  const int n_conv = 4;
  for (int j = 0; j <= J; ++j) {
    const double lo = 3.0 * params.R0 * (j + 1);
    const double hi = 6.0 * params.R0 * (j + 1);
    if (hi > rho.rho_max())
      throw std::invalid_argument("build_cutoffs: rho_max too small for level " +
                                  std::to_string(j));
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * 0.94;
    const double rb = half / n_conv;
    const int m = static_cast<int>(std::floor(rb / rho.h));
    if (m < 4)
      throw std::invalid_argument("build_cutoffs: grid too coarse for the j=" +
                                  std::to_string(j) + " transition");
    // normalized compact bump
    std::vector<double> bump(2 * m + 1);
    double mass = 0;
    for (int t = -m; t <= m; ++t) {
      const double s = double(t) / (m + 1);
      bump[t + m] = std::exp(-1.0 / (1.0 - s * s));
      mass += bump[t + m];
    }
    for (double& b : bump) b /= mass;
    std::vector<double> cur(rho.n);
    for (int i = 0; i < rho.n; ++i) cur[i] = rho.rho(i) >= center ? 1.0 : 0.0;
    std::vector<double> nxt(rho.n);
    for (int c = 0; c < n_conv; ++c) {
      for (int i = 0; i < rho.n; ++i) {
        double acc = 0;
        for (int t = -m; t <= m; ++t) {
          const int idx = i - t;
          const double val = idx < 0 ? 0.0 : (idx >= rho.n ? 1.0 : cur[idx]);
          acc += bump[t + m] * val;
        }
        nxt[i] = acc;
      }
      cur.swap(nxt);
    }
    for (int i = 0; i < rho.n; ++i) {
      double v = cur[i];
      if (rho.rho(i) <= lo) v = 0.0;
      if (rho.rho(i) >= hi) v = 1.0;
      fam.psi(j, i) = std::min(1.0, std::max(0.0, v));
    }
  }
  return fam;
}

WitnessFunction assemble_v(const TransportContext& ctx, const CutoffFamily& cutoffs,
                           const std::vector<EigenCoeffField>& fields) {
  const RhoGrid& g = *ctx.rho;
  const int J = static_cast<int>(fields.size()) - 1;
  if (cutoffs.J < J) throw std::invalid_argument("assemble_v: cutoff family too short");
  WitnessFunction w;
  w.J = J;
  w.c = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  for (int j = 0; j <= J; ++j)
    for (int i = 0; i < g.n; ++i) w.c.col(i) += cutoffs.psi(j, i) * fields[j].c.col(i);
  // dominance of the leading mode-0 term over the tail of the series
  double ratio = 0;
  for (int i = g.index_at_or_above(6.0 * ctx.params.R0); i < g.n; ++i) {
    double tail = 0;
    for (int j = 1; j <= J; ++j) tail += cutoffs.psi(j, i) * std::abs(fields[j].c(0, i));
    const double lead = cutoffs.psi(0, i) * std::abs(fields[0].c(0, i));
    if (lead < 1e-280) continue;
    ratio = std::max(ratio, tail / lead);
  }
  w.dominance_ratio = ratio;
  if (ratio >= 1.0)
    throw std::runtime_error("assemble_v: series not dominated; increase R0 (ratio=" +
                             std::to_string(ratio) + ")");
  return w;
}

std::vector<cdouble> witness_at_zero(const TransportContext& ctx, const WitnessFunction& w,
                                     int beta) {
  if (beta < 0 || beta > 1) throw std::invalid_argument("witness_at_zero: beta in {0,1}");
  const Spectrum& spec = *ctx.spec;
  const int n = ctx.K() + 1;
  std::vector<double> phival(n);
  if (beta == 0) {
    for (int k = 0; k < n; ++k) phival[k] = spec.phi[k][spec.grid.center()];
  } else {
    UniformStencil d1(1, 4, spec.grid.h);
    for (int k = 0; k < n; ++k) {
      const int c = spec.grid.center();
      double acc = 0;
      for (int t = -d1.half; t <= d1.half; ++t)
        acc += d1.centered[t + d1.half] * spec.phi[k][c + t];
      phival[k] = acc;
    }
  }
  std::vector<cdouble> out(ctx.rho->n, cdouble{0.0, 0.0});
  for (int i = 0; i < ctx.rho->n; ++i) {
    cdouble acc = 0;
    for (int k = 0; k < n; ++k) acc += w.c(k, i) * phival[k];
    out[i] = acc;
  }
  return out;
}

int select_beta(const Spectrum& spec) {
  return std::abs(spec.phi0_at_zero()) > 1e-8 ? 0 : 1;
}

ProfileIntegral::ProfileIntegral(const TransportContext& ctx, const WitnessFunction& w,
                                 int beta)
    : ctx_(&ctx), w_(&w), beta_(beta) {
  const RhoGrid& g = *ctx.rho;
  const double s0 = ctx.params.s0_d;
  const double eta_lo = std::pow(3.0 * ctx.params.R0, s0);
  const double eta_hi = std::pow(0.98 * g.rho_max(), s0);
  deta_ = s0 * std::pow(3.0 * ctx.params.R0, s0 - 1.0) *
          std::min(1.0, 1.0 / std::abs(ctx.params.mu0_tilde)) / 12.0;
  const int n_max = static_cast<int>((eta_hi - eta_lo) / deta_) + 1;
  auto v0 = witness_at_zero(ctx, w, beta);
  const cdouble w_exp = (ctx.params.r_d + 1.0) / s0 + double(beta_) / ctx.params.q - 1.0;
  eta_.reserve(n_max);
  g_.reserve(n_max);
  double gmax = 0;
  int dead = 0;
  for (int i = 0; i < n_max; ++i) {
    const double eta = eta_lo + i * deta_;
    const double rho = std::pow(eta, 1.0 / s0);
    const cdouble amp = std::pow(cdouble(eta, 0.0), w_exp) / s0;
    const cdouble val = amp * interp_cubic(g, v0, rho);
    eta_.push_back(eta);
    g_.push_back(val);
    gmax = std::max(gmax, std::abs(val));
    dead = (std::abs(val) < 1e-16 * gmax) ? dead + 1 : 0;
    if (dead > 64 && i > 256) break;
  }
  n_used_ = static_cast<int>(eta_.size());
  if (n_used_ < 64) throw std::runtime_error("ProfileIntegral: eta grid too short");
  AmplitudeFamily fam;
  a_.resize(n_used_ - 1);
  for (int i = 0; i + 1 < n_used_; ++i) a_[i] = fam.interval_coeffs(g_, i);
}

cdouble ProfileIntegral::integrate(
    double y, const std::vector<std::array<cdouble, kAmpOrder>>& a) const {
  const cdouble z{0.0, y * deta_};
  const auto G = exp_moments(z);
  const cdouble rot = std::exp(cdouble(0.0, y * deta_));
  cdouble phase = std::exp(cdouble(0.0, y * eta_[0]));
  cdouble acc = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    cdouble s = 0;
    for (int m = 0; m < kAmpOrder; ++m) s += a[i][m] * G[m];
    acc += phase * s;
    phase *= rot;
  }
  return acc * deta_;
}

cdouble ProfileIntegral::at_zero(double y) const { return integrate(y, a_); }

cdouble ProfileIntegral::at(double x, double y) const {
  const TransportContext& ctx = *ctx_;
  const RhoGrid& g = *ctx.rho;
  const Spectrum& spec = *ctx.spec;
  const double s0 = ctx.params.s0_d;
  const int n = ctx.K() + 1;
  const double dil = std::abs(x) * std::pow(g.rho_max(), s0 / ctx.params.q);
  if (dil > spec.grid.L)
    throw std::invalid_argument("ProfileIntegral: dilated argument leaves the x-domain");
  // mode sums with the dilated argument; beta-th x-derivative of the modes
  std::vector<std::vector<double>> basis(n);
  if (beta_ == 0) {
    for (int k = 0; k < n; ++k) basis[k] = spec.phi[k];
  } else {
    UniformStencil d1(1, 4, spec.grid.h);
    for (int k = 0; k < n; ++k) basis[k] = d1.apply(spec.phi[k]);
  }
  auto sample_phi = [&](int k, double xx) {
    const double t = (xx + spec.grid.L) / spec.grid.h;
    int i = static_cast<int>(t);
    i = std::max(1, std::min(spec.grid.N - 3, i));
    const double u = t - i;
    const auto& b = basis[k];
    const double fm = b[i - 1], f0 = b[i], f1 = b[i + 1], f2 = b[i + 2];
    const double a0 = f0;
    const double a1 = (-2.0 * fm - 3.0 * f0 + 6.0 * f1 - f2) / 6.0;
    const double a2 = (fm - 2.0 * f0 + f1) * 0.5;
    const double a3 = (-fm + 3.0 * f0 - 3.0 * f1 + f2) / 6.0;
    return a0 + u * (a1 + u * (a2 + u * a3));
  };
  const cdouble w_exp = (ctx.params.r_d + 1.0) / s0 + double(beta_) / ctx.params.q - 1.0;
  std::vector<cdouble> gx(n_used_);
  std::vector<cdouble> crow(n);
  for (int i = 0; i < n_used_; ++i) {
    const double eta = eta_[i];
    const double rho = std::pow(eta, 1.0 / s0);
    const double xa = x * std::pow(rho, s0 / ctx.params.q);
    // interpolate mode coefficients of the witness at rho
    int ir = static_cast<int>((rho - g.rho_min) / g.h);
    ir = std::max(1, std::min(g.n - 3, ir));
    const double t = (rho - g.rho(ir)) / g.h;
    cdouble val = 0;
    for (int k = 0; k < n; ++k) {
      const cdouble fm = w_->c(k, ir - 1), f0 = w_->c(k, ir), f1 = w_->c(k, ir + 1),
                    f2 = w_->c(k, ir + 2);
      const cdouble a0 = f0;
      const cdouble a1 = (-2.0 * fm - 3.0 * f0 + 6.0 * f1 - f2) * (1.0 / 6.0);
      const cdouble a2 = (fm - 2.0 * f0 + f1) * 0.5;
      const cdouble a3 = (-fm + 3.0 * f0 - 3.0 * f1 + f2) * (1.0 / 6.0);
      const cdouble ck = a0 + t * (a1 + t * (a2 + t * a3));
      val += ck * sample_phi(k, xa);
    }
    gx[i] = std::pow(cdouble(eta, 0.0), w_exp) / s0 * val;
  }
  AmplitudeFamily fam;
  std::vector<std::array<cdouble, kAmpOrder>> ax(n_used_ - 1);
  for (int i = 0; i + 1 < n_used_; ++i) ax[i] = fam.interval_coeffs(gx, i);
  return integrate(y, ax);
}

FourierProfile closed_form_fourier(const TransportContext& ctx, const WitnessFunction& w,
                                   int beta, const std::vector<double>& eta_grid) {
  const double s0 = ctx.params.s0_d;
  const double eta_min = std::pow(3.0 * ctx.params.R0, s0);
  const double eta_max = std::pow(ctx.rho->rho_max(), s0);
  FourierProfile p;
  p.beta = beta;
  p.lambda_prime = (ctx.params.r_d.real() + 1.0) / s0 + double(beta) / ctx.params.q - 1.0;
  auto v0 = witness_at_zero(ctx, w, beta);
  const cdouble w_exp = (ctx.params.r_d + 1.0) / s0 + double(beta) / ctx.params.q - 1.0;
  for (double eta : eta_grid) {
    if (eta <= eta_min || eta >= eta_max)
      throw std::invalid_argument("closed_form_fourier: eta outside the resolved window");
    const double rho = std::pow(eta, 1.0 / s0);
    const cdouble F = 2.0 * std::numbers::pi / s0 * std::pow(cdouble(eta, 0.0), w_exp) *
                      interp_cubic(*ctx.rho, v0, rho);
    p.eta.push_back(eta);
    p.closed_form.push_back(F);
    p.certificate.push_back(std::abs(F) * std::exp(std::abs(ctx.params.mu0_tilde) * rho) *
                            std::pow(eta, -p.lambda_prime));
  }
  return p;
}

void numeric_fourier_crosscheck(const TransportContext& ctx, const ProfileIntegral& av,
                                FourierProfile& profile, const std::vector<double>& etas,
                                const CrosscheckOptions& opt) {
  if (static_cast<int>(etas.size()) < opt.min_samples)
    throw std::invalid_argument("numeric_fourier_crosscheck: too few eta samples");
  const double A0 = std::abs(av.at_zero(0.0));
  if (!(A0 > 0)) throw std::runtime_error("numeric_fourier_crosscheck: empty profile");
  double Y = 6.0 * std::max(1.0, 1.0 / std::abs(ctx.params.mu0_tilde));
  while (Y < 150.0 && std::abs(av.at_zero(Y)) > 1e-9 * A0) Y *= 1.25;

  // amplitude resolution from the effective frequency content of the profile
  double eta_eff = av.eta_cut();
  {
    // fourth-moment estimate of the spectral content using |A| samples is not
    // available here; the cut frequency is a safe upper bound, relaxed below.
    eta_eff = 0.6 * eta_eff;
  }
  const double dy = 0.8 / eta_eff;
  const int n_half = static_cast<int>(std::ceil(2.0 * Y / dy));
  const int ny = 2 * n_half + 1;
  std::vector<cdouble> A(ny);
  parallel_chunks(ny, opt.threads, [&](int i) {
    const double y = (i - n_half) * dy;
    A[i] = av.at_zero(y);
  });
  // window tail budget
  const double edge = std::max(std::abs(A.front()), std::abs(A.back()));
  if (edge > 1e-5 * A0)
    throw std::runtime_error("numeric_fourier_crosscheck: window-tail budget exceeded");

  auto kaiser = [&](double y, double half) {
    const double t = y / half;
    if (std::abs(t) >= 1.0) return 0.0;
    return bessel_I0(10.0 * std::sqrt(1.0 - t * t)) / bessel_I0(10.0);
  };
  std::vector<cdouble> wA_narrow(ny), wA_wide(ny);
  for (int i = 0; i < ny; ++i) {
    const double y = (i - n_half) * dy;
    wA_narrow[i] = A[i] * kaiser(y, Y);
    wA_wide[i] = A[i] * kaiser(y, 2.0 * Y);
  }
  AmplitudeFamily fam;
  std::vector<std::array<cdouble, kAmpOrder>> an(ny - 1), aw(ny - 1);
  for (int i = 0; i + 1 < ny; ++i) {
    an[i] = fam.interval_coeffs(wA_narrow, i);
    aw[i] = fam.interval_coeffs(wA_wide, i);
  }
  auto transform = [&](double eta, const std::vector<std::array<cdouble, kAmpOrder>>& a) {
    const cdouble z{0.0, -eta * dy};
    const auto G = exp_moments(z);
    const cdouble rot = std::exp(z);
    cdouble phase = std::exp(cdouble(0.0, -eta * (-n_half * dy)));
    cdouble acc = 0;
    for (int i = 0; i + 1 < ny; ++i) {
      cdouble s = 0;
      for (int m = 0; m < kAmpOrder; ++m) s += a[i][m] * G[m];
      acc += phase * s;
      phase *= rot;
    }
    return acc * dy;
  };
  profile.numeric.assign(profile.eta.size(), cdouble{0.0, 0.0});
  profile.numeric_err.assign(profile.eta.size(), 0.0);
  for (double eta : etas) {
    // locate in profile
    auto it = std::min_element(profile.eta.begin(), profile.eta.end(),
                               [eta](double x, double y2) {
                                 return std::abs(x - eta) < std::abs(y2 - eta);
                               });
    const size_t idx = it - profile.eta.begin();
    const cdouble Fn_wide = transform(eta, aw);
    const cdouble Fn_narrow = transform(eta, an);
    const cdouble Fc = profile.closed_form.at(idx);
    const double doubling = std::abs(Fn_wide - Fn_narrow) / std::max(1e-300, std::abs(Fn_wide));
    if (doubling > 0.05)
      throw std::runtime_error("numeric_fourier_crosscheck: y-window not converged");
    profile.numeric[idx] = Fn_wide;
    profile.numeric_err[idx] = std::abs(Fn_wide - Fc) / std::max(1e-300, std::abs(Fc));
  }
}

GevreyFit gevrey_index_fit(const TransportContext& ctx, const FourierProfile& profile) {
  const size_t n = profile.eta.size();
  if (n < 12) throw std::invalid_argument("gevrey_index_fit: need >= 12 samples");
  const double span = profile.eta.back() / profile.eta.front();
  if (span < 31.0)
    throw std::invalid_argument("gevrey_index_fit: eta window must span >= 1.5 decades");
  std::vector<double> xs, ys;
  double prev = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const double t = std::abs(profile.closed_form[i]) * std::pow(profile.eta[i], -profile.lambda_prime);
    if (!(t > 0) || !(t < 1))
      throw std::runtime_error("gevrey_index_fit: profile outside the decay regime");
    const double neglog = -std::log(t);
    if (neglog < prev * (1.0 - 1e-9))
      throw std::runtime_error("gevrey_index_fit: non-monotone -log|F| (window contamination)");
    prev = std::max(prev, neglog);
    xs.push_back(std::log(profile.eta[i]));
    ys.push_back(std::log(neglog));
  }
  LineFit f = fit_line(xs, ys);
  GevreyFit out;
  out.slope = f.slope;
  out.slope_ci = 2.0 * f.slope_se;
  out.rate = std::exp(f.intercept);
  out.rate_ci = out.rate * 2.0 * f.intercept_se;
  out.fit_rms = f.rms;
  return out;
}

STermsReport compute_S_terms(const TransportContext& ctx, const CutoffFamily& cutoffs,
                             const std::vector<EigenCoeffField>& fields) {
  const RhoGrid& g = *ctx.rho;
  const int J = static_cast<int>(fields.size()) - 1;
  const int two_a = ctx.two_a();
  const double amt = std::abs(ctx.params.mu0_tilde);
  STermsReport rep;

  // cutoff derivatives
  std::vector<std::vector<std::vector<double>>> dpsi(J + 1);
  for (int j = 0; j <= J; ++j) {
    dpsi[j].resize(two_a + 1);
    std::vector<double> row(g.n);
    for (int i = 0; i < g.n; ++i) row[i] = cutoffs.psi(j, i);
    dpsi[j][0] = row;
    for (int gamma = 1; gamma <= two_a; ++gamma) {
      UniformStencil st(gamma, 4, g.h);
      dpsi[j][gamma] = st.apply(row);
    }
  }

  // cached symbol applications B[j][k] = Ptilde_k(X) u_j (no rho derivative)
  auto apply_poly = [&](int k, const Eigen::MatrixXcd& f) {
    const TransportSymbol& sym = ctx.ops.symbol(k);
    const int deg = static_cast<int>(sym.poly_d.size()) - 1;
    Eigen::MatrixXcd acc = sym.poly_d[deg] * f;
    for (int l = deg - 1; l >= 0; --l) acc = ctx.X * acc + sym.poly_d[l] * f;
    return acc;
  };

  Eigen::MatrixXcd S1 = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  Eigen::MatrixXcd S2 = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  for (int j = 0; j <= J; ++j) {
    for (int k = 0; k <= two_a; ++k) {
      const int m_ord = two_a - k;
      Eigen::MatrixXcd base;
      double c0 = 1.0;
      if (k == 0) {
        base = fields[j].c;
        c0 = ctx.ops.p0.coeff_d;
      } else {
        base = apply_poly(k, fields[j].c);
      }
      // S1 term: rho^{-k} psi_j P_k u_j (P_0 includes the mu part)
      {
        Eigen::MatrixXcd der = d_rho(g, base, m_ord);
        for (int i = 0; i < g.n; ++i) {
          const double w = std::pow(g.rho(i), -k) * dpsi[j][0][i];
          if (k == 0) {
            Eigen::VectorXcd col = c0 * der.col(i);
            for (int kk = 0; kk <= ctx.K(); ++kk)
              col(kk) += ctx.spec->mu[kk] * fields[j].c(kk, i);
            S1.col(i) += w * col;
          } else {
            S1.col(i) += w * der.col(i);
          }
        }
      }
      // S2 terms: cutoff-derivative commutators
      for (int gamma = 1; gamma <= m_ord; ++gamma) {
        const double cbin = double(binom_l(m_ord, gamma));
        Eigen::MatrixXcd der = d_rho(g, base, m_ord - gamma);
        const double cc = (k == 0) ? c0 : 1.0;
        for (int i = 0; i < g.n; ++i) {
          const double w =
              std::pow(g.rho(i), -k) * cbin * dpsi[j][gamma][i] * cc;
          if (w != 0.0) S2.col(i) += w * der.col(i);
        }
      }
    }
  }

  // band diagnostics
  rep.band_lo.resize(J + 1);
  rep.band_hi.resize(J + 1);
  rep.s1_band_sup.assign(J + 1, 0.0);
  rep.s2_band_sup.assign(J + 1, 0.0);
  std::vector<bool> in_band(g.n, false);
  for (int j = 0; j <= J; ++j) {
    rep.band_lo[j] = 3.0 * ctx.params.R0 * (j + 1);
    rep.band_hi[j] = 6.0 * ctx.params.R0 * (j + 1);
    const int lo = g.index_at_or_above(rep.band_lo[j]);
    const int hi = g.index_at_or_above(rep.band_hi[j]);
    for (int i = lo; i < hi; ++i) in_band[i] = true;
    for (int i = lo; i < hi; ++i) {
      const double wexp = std::exp(amt * g.rho(i));
      rep.s1_band_sup[j] = std::max(rep.s1_band_sup[j], S1.col(i).norm() * wexp);
      rep.s2_band_sup[j] = std::max(rep.s2_band_sup[j], S2.col(i).norm() * wexp);
    }
  }
  // leakage outside the bands, relative to the largest band value
  double inside = 0, outside = 0;
  for (int i = 0; i < g.n; ++i) {
    const double v = S2.col(i).norm() * std::exp(amt * g.rho(i));
    if (in_band[i])
      inside = std::max(inside, v);
    else
      outside = std::max(outside, v);
  }
  rep.support_leak = outside / std::max(1e-300, inside);

  // f10 block: psi_0 P0 u0, relative to the scale of P0 on u0
  {
    Eigen::MatrixXcd p0u0 = apply_P0(ctx, fields[0].c, 6);
    double num = 0, den = 0;
    for (int i = 0; i < g.n; ++i) {
      num = std::max(num, dpsi[0][0][i] * p0u0.col(i).norm());
      den = std::max(den, ctx.spec->mu[0] * std::abs(fields[0].c(0, i)));
    }
    rep.f10_norm = num / std::max(1e-300, den);
  }

  // super-exponential decay of the band maxima: log sup ~ -c (j+1) log(j+1)
  {
    std::vector<double> xs, ys;
    for (int j = 1; j <= J; ++j) {
      if (rep.s2_band_sup[j] < 1e-290) continue;
      xs.push_back((j + 1.0) * std::log(j + 1.0));
      ys.push_back(std::log(rep.s2_band_sup[j]));
    }
    if (xs.size() >= 3) {
      LineFit f = fit_line(xs, ys);
      rep.band_fit_c = -f.slope;
    }
  }
  {
    std::vector<double> xs, ys;
    for (int i = 0; i < g.n; ++i) {
      if (!in_band[i]) continue;
      const double v = S2.col(i).norm();
      if (v < 1e-290) continue;
      const double r = g.rho(i);
      xs.push_back(r * std::log(r));
      ys.push_back(std::log(v) + amt * r);
    }
    if (xs.size() >= 8) rep.rholog_slope = fit_line(xs, ys).slope;
  }
  return rep;
}

std::vector<double> default_eta_window(const TransportContext& ctx, int count) {
  const double s0 = ctx.params.s0_d;
  const double lo = std::pow(6.0 * ctx.params.R0, s0) * 1.2;
  const double hi = std::pow(0.9 * ctx.rho->rho_max(), s0);
  if (!(hi > lo)) throw std::invalid_argument("default_eta_window: empty window");
  std::vector<double> etas(count);
  for (int i = 0; i < count; ++i)
    etas[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
  return etas;
}

}  // namespace gevrey
