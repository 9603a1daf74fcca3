#include "gevrey/transport.hpp"

#include "gevrey/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace gevrey {

namespace {

void parallel_rows(int n_rows, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_rows < 4) {
    for (int r = 0; r < n_rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int nt = std::min(threads, n_rows);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= n_rows) return;
        fn(r);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace

TransportContext make_transport_context(const Spectrum& spec, const RhoGrid& rho,
                                        const ModelParams& params,
                                        const TransportOperators& ops, double residual_tol,
                                        int threads) {
  TransportContext ctx;
  ctx.spec = &spec;
  ctx.rho = &rho;
  ctx.params = params;
  ctx.ops = ops;
  ctx.X = coupling_matrix(spec, CouplingKind::XDx).cast<cdouble>();
  ctx.residual_tol = residual_tol;
  ctx.threads = std::max(1, threads);
  for (int k = 0; k <= spec.K; ++k)
    ctx.roots.push_back(make_root_system(k, spec.mu[k], params.a, params.s0_d,
                                         params.mu0_tilde, params.eps_mu));
  ctx.tail_freqs = {params.mu0_star};
  if (std::abs(params.mu0_star.imag()) > 1e-12)
    ctx.tail_freqs.push_back(std::conj(params.mu0_star));
  return ctx;
}

Eigen::MatrixXcd d_rho(const RhoGrid& g, const Eigen::MatrixXcd& m, int order,
                       int accuracy) {
  if (order == 0) return m;
  UniformStencil st(order, accuracy, g.h);
  Eigen::MatrixXcd out(m.rows(), m.cols());
  std::vector<cdouble> row(m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int i = 0; i < m.cols(); ++i) row[i] = m(r, i);
    auto der = st.apply(row);
    for (int i = 0; i < m.cols(); ++i) out(r, i) = der[i];
  }
  return out;
}

Eigen::MatrixXcd apply_Pk(const TransportContext& ctx, int j, const Eigen::MatrixXcd& field,
                          int accuracy) {
  const TransportSymbol& sym = ctx.ops.symbol(j);
  const int deg = static_cast<int>(sym.poly_d.size()) - 1;
  Eigen::MatrixXcd acc = sym.poly_d[deg] * field;
  for (int l = deg - 1; l >= 0; --l) acc = ctx.X * acc + sym.poly_d[l] * field;
  return d_rho(*ctx.rho, acc, sym.rho_order, accuracy);
}

Eigen::MatrixXcd apply_P0(const TransportContext& ctx, const Eigen::MatrixXcd& field,
                          int accuracy) {
  Eigen::MatrixXcd out = d_rho(*ctx.rho, field, ctx.two_a(), accuracy);
  out *= ctx.ops.p0.coeff_d;
  for (int k = 0; k < field.rows(); ++k) out.row(k) += ctx.spec->mu[k] * field.row(k);
  return out;
}

EigenCoeffField init_u0(const TransportContext& ctx) {
  EigenCoeffField f;
  f.j = 0;
  f.c = Eigen::MatrixXcd::Zero(ctx.K() + 1, ctx.rho->n);
  for (int i = 0; i < ctx.rho->n; ++i)
    f.c(0, i) = std::exp(ctx.params.mu0_star * ctx.rho->rho(i));
  f.valid_from = 3.0 * ctx.params.R0;
  f.envelope = {1.0, 0.0, ctx.params.mu0_tilde};
  return f;
}

namespace {

// RHS of the off-diagonal equation: -(sum_{k=1..min(j,2a)} rho^{-k} P_k u_{j-k}),
// mode-0 row removed.
Eigen::MatrixXcd offdiag_rhs(const TransportContext& ctx, int j,
                             const std::vector<EigenCoeffField>& history) {
  const RhoGrid& g = *ctx.rho;
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  const int kmax = std::min(j, ctx.two_a());
  for (int k = 1; k <= kmax; ++k) {
    Eigen::MatrixXcd T = apply_Pk(ctx, k, history[j - k].c);
    for (int i = 0; i < g.n; ++i) {
      const double w = std::pow(g.rho(i), -k);
      G.col(i) -= w * T.col(i);
    }
  }
  G.row(0).setZero();
  return G;
}

// RHS of the diagonal equation (mode-0 row only); uses the freshly computed
// off-diagonal block of u_j and the history.
Eigen::VectorXcd diag_rhs(const TransportContext& ctx, int j, const Eigen::MatrixXcd& offdiag,
                          const std::vector<EigenCoeffField>& history) {
  const RhoGrid& g = *ctx.rho;
  Eigen::VectorXcd G = Eigen::VectorXcd::Zero(g.n);
  {
    Eigen::MatrixXcd T1 = apply_Pk(ctx, 1, offdiag);
    for (int i = 0; i < g.n; ++i) G(i) -= T1(0, i) / g.rho(i);
  }
  // The pi P1 pi u_{j-1} source vanishes identically with the chosen r.
  const int kmax = std::min(j, ctx.two_a() - 1);
  for (int k = 1; k <= kmax; ++k) {
    Eigen::MatrixXcd T = apply_Pk(ctx, k + 1, history[j - k].c);
    for (int i = 0; i < g.n; ++i) G(i) -= T(0, i) * std::pow(g.rho(i), -(k + 1));
  }
  return G;
}

}  // namespace

Eigen::MatrixXcd solve_offdiagonal(const TransportContext& ctx, int j,
                                   const std::vector<EigenCoeffField>& history,
                                   Eigen::MatrixXcd* rhs_out) {
  const RhoGrid& g = *ctx.rho;
  Eigen::MatrixXcd G = offdiag_rhs(ctx, j, history);
  if (rhs_out) *rhs_out = G;
  const double R = ctx.params.R0 * (j + 1);
  const double sfac = ctx.ode_scale();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  parallel_rows(ctx.K(), ctx.threads, [&](int r) {
    const int m = r + 1;  // modes 1..K
    RhoGridFunction f(g);
    for (int i = 0; i < g.n; ++i) f.v[i] = sfac * G(m, i);
    f.tail = fit_tail(f, ctx.tail_freqs);
    RhoGridFunction sol = apply_Ek(ctx.roots[m], f, R, ctx.params.mu0_tilde);
    for (int i = 0; i < g.n; ++i) out(m, i) = sol.v[i];
  });
  return out;
}

Eigen::VectorXcd solve_diagonal(const TransportContext& ctx, int j,
                                const Eigen::MatrixXcd& offdiag,
                                const std::vector<EigenCoeffField>& history,
                                Eigen::VectorXcd* rhs_out) {
  const RhoGrid& g = *ctx.rho;
  Eigen::VectorXcd G = diag_rhs(ctx, j, offdiag, history);
  if (rhs_out) *rhs_out = G;
  const double R = ctx.params.R0 * (j + 1);
  RhoGridFunction f(g);
  for (int i = 0; i < g.n; ++i) f.v[i] = ctx.ode_scale() * G(i);
  f.tail = fit_tail(f, ctx.tail_freqs);
  RhoGridFunction sol = apply_Ek(ctx.roots[0], f, R, ctx.params.mu0_tilde);
  Eigen::VectorXcd out(g.n);
  for (int i = 0; i < g.n; ++i) out(i) = sol.v[i];
  return out;
}

namespace {

struct Window {
  int lo = 0, hi = 0;  // node range [lo, hi)
};

Window check_window(const TransportContext& ctx, double valid_from) {
  const RhoGrid& g = *ctx.rho;
  Window w;
  w.lo = g.index_at_or_above(valid_from);
  w.hi = g.index_at_or_above(ctx.window_hi_frac * g.rho_max());
  if (w.hi - w.lo < 10) throw std::runtime_error("transport: validity window too short");
  return w;
}

// Per-node relative sup of ||D_col|| against the equation scale over a small
// node halo (a support edge otherwise divides stencil noise by itself).
double relative_sup(const Eigen::MatrixXcd& D, const std::vector<Eigen::MatrixXcd*>& scales,
                    const Window& w, std::vector<double>* profile = nullptr) {
  const int n = static_cast<int>(D.cols());
  std::vector<double> scale(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (const auto* s : scales) scale[i] = std::max(scale[i], s->col(i).norm());
  const int halo = 10;
  double worst = 0;
  for (int i = w.lo; i < w.hi; ++i) {
    double denom = 0;
    for (int j = std::max(0, i - halo); j <= std::min(n - 1, i + halo); ++j)
      denom = std::max(denom, scale[j]);
    if (denom < 1e-250) continue;
    const double rel = D.col(i).norm() / denom;
    if (profile) (*profile)[i] = std::max((*profile)[i], rel);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

LevelSolution solve_uj(const TransportContext& ctx, int j,
                       const std::vector<EigenCoeffField>& history) {
  if (j < 1) throw std::invalid_argument("solve_uj: j >= 1");
  LevelSolution out;
  Eigen::MatrixXcd offdiag = solve_offdiagonal(ctx, j, history, &out.rhs_offdiag);
  Eigen::VectorXcd diag = solve_diagonal(ctx, j, offdiag, history, &out.rhs_diag);
  out.field.j = j;
  out.field.c = offdiag;
  out.field.c.row(0) = diag.transpose();
  out.field.valid_from = 3.0 * ctx.params.R0 * (j + 1);

  // residuals of (tr1)/(tr2) on the interior window
  const Window w = check_window(ctx, out.field.valid_from);
  Eigen::MatrixXcd od = out.field.c;
  od.row(0).setZero();
  Eigen::MatrixXcd P0od = apply_P0(ctx, od, 6);
  Eigen::MatrixXcd D1 = P0od - out.rhs_offdiag;
  D1.row(0).setZero();
  out.residuals.j = j;
  out.residual_profile.assign(ctx.rho->n, 0.0);
  {
    std::vector<Eigen::MatrixXcd*> scales{&P0od, &out.rhs_offdiag};
    out.residuals.tr1 = relative_sup(D1, scales, w, &out.residual_profile);
  }
  {
    Eigen::MatrixXcd dg = Eigen::MatrixXcd::Zero(1, ctx.rho->n);
    dg.row(0) = diag.transpose();
    // P0 on the single mode-0 row
    Eigen::MatrixXcd P0d = d_rho(*ctx.rho, dg, ctx.two_a(), 6) * ctx.ops.p0.coeff_d;
    P0d.row(0) += ctx.spec->mu[0] * dg.row(0);
    Eigen::MatrixXcd rhs1 = Eigen::MatrixXcd::Zero(1, ctx.rho->n);
    rhs1.row(0) = out.rhs_diag.transpose();
    Eigen::MatrixXcd D2 = P0d - rhs1;
    std::vector<Eigen::MatrixXcd*> scales{&P0d, &rhs1};
    out.residuals.tr2 = relative_sup(D2, scales, w, &out.residual_profile);
  }

  // decay envelope (c, beta, mu0_tilde) with beta = (j - delta) kappa
  const double beta = (j - ctx.params.delta) * ctx.params.kappa;
  double cmax = 0;
  for (int i = w.lo; i < w.hi; ++i) {
    const double r = ctx.rho->rho(i);
    cmax = std::max(cmax, out.field.c.col(i).norm() *
                              std::exp(std::abs(ctx.params.mu0_tilde) * r) *
                              std::pow(r, beta));
  }
  out.field.envelope = {cmax, beta, ctx.params.mu0_tilde};
  return out;
}

DecayReport measure_decay(const TransportContext& ctx, const EigenCoeffField& field) {
  const RhoGrid& g = *ctx.rho;
  const Window w = check_window(ctx, field.valid_from);
  if (w.hi - w.lo < 10) throw std::runtime_error("measure_decay: window too short");
  std::vector<double> xs, ys;
  const double amt = std::abs(ctx.params.mu0_tilde);
  for (int i = w.lo; i < w.hi; ++i) {
    const double nrm = field.c.col(i).norm();
    if (nrm < 1e-280) continue;
    xs.push_back(std::log(g.rho(i)));
    ys.push_back(std::log(nrm) + amt * g.rho(i));
  }
  if (xs.size() < 10) throw std::runtime_error("measure_decay: too few usable nodes");
  LineFit fit = fit_line(xs, ys);
  DecayReport rep;
  rep.j = field.j;
  rep.measured_exponent = fit.slope;
  rep.target_exponent = -(field.j - ctx.params.delta) * ctx.params.kappa;
  rep.window_lo = g.rho(w.lo);
  rep.window_hi = g.rho(w.hi - 1);
  rep.fit_rms = fit.rms;
  return rep;
}

double telescope_residual(const TransportContext& ctx,
                          const std::vector<EigenCoeffField>& fields) {
  const RhoGrid& g = *ctx.rho;
  const int J = static_cast<int>(fields.size()) - 1;
  const Window w = check_window(ctx, 3.0 * ctx.params.R0 * (J + 1));
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(ctx.K() + 1, g.n);
  std::vector<double> scale(g.n, 0.0);
  for (int t = 0; t <= J; ++t) {
    Eigen::MatrixXcd p0 = apply_P0(ctx, fields[t].c, 6);
    T += p0;
    for (int i = 0; i < g.n; ++i) scale[i] = std::max(scale[i], p0.col(i).norm());
    const int kmax = std::min(t, ctx.two_a());
    for (int k = 1; k <= kmax; ++k) {
      Eigen::MatrixXcd pk = apply_Pk(ctx, k, fields[t - k].c, 6);
      for (int i = 0; i < g.n; ++i) {
        const double wgt = std::pow(g.rho(i), -k);
        T.col(i) += wgt * pk.col(i);
        scale[i] = std::max(scale[i], wgt * pk.col(i).norm());
      }
    }
  }
  double worst = 0;
  for (int i = w.lo; i < w.hi; ++i) {
    if (scale[i] < 1e-250) continue;
    worst = std::max(worst, T.col(i).norm() / scale[i]);
  }
  return worst;
}

double pi_p1_pi_magnitude(const TransportContext& ctx) {
  const TransportSymbol& sym = ctx.ops.symbol(1);
  const int n = ctx.K() + 1;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  const int deg = static_cast<int>(sym.poly_d.size()) - 1;
  M = sym.poly_d[deg] * I;
  for (int l = deg - 1; l >= 0; --l) M = ctx.X * M + sym.poly_d[l] * I;
  return std::abs(M(0, 0)) / std::max(1e-300, M.row(0).norm());
}

double pi_p1_u0_magnitude(const TransportContext& ctx, const EigenCoeffField& u0) {
  Eigen::MatrixXcd w = apply_Pk(ctx, 1, u0.c);
  const Window win = check_window(ctx, u0.valid_from);
  double num = 0, den = 0;
  for (int i = win.lo; i < win.hi; ++i) {
    num = std::max(num, std::abs(w(0, i)));
    den = std::max(den, w.col(i).norm());
  }
  return num / std::max(1e-300, den);
}

TransportRun run_transport(const TransportContext& ctx, int J) {
  TransportRun run;
  run.fields.push_back(init_u0(ctx));
  for (int j = 1; j <= J; ++j) {
    LevelSolution sol = solve_uj(ctx, j, run.fields);
    if (sol.residuals.tr1 > ctx.residual_tol || sol.residuals.tr2 > ctx.residual_tol)
      throw std::runtime_error(
          "transport: residual above tolerance at level " + std::to_string(j) +
          " (tr1=" + std::to_string(sol.residuals.tr1) +
          ", tr2=" + std::to_string(sol.residuals.tr2) +
          "); refine the rho grid or raise the tolerance");
    run.residuals.push_back(sol.residuals);
    run.residual_profiles.push_back(std::move(sol.residual_profile));
    run.fields.push_back(std::move(sol.field));
  }
  for (const auto& f : run.fields) run.decay.push_back(measure_decay(ctx, f));
  run.telescope = telescope_residual(ctx, run.fields);
  return run;
}

}  // namespace gevrey
