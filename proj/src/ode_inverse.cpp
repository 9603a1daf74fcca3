#include "gevrey/ode_inverse.hpp"

#include "gevrey/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gevrey {

std::vector<cdouble> compute_roots(double mu_k, int a, double s0) {
  if (!(mu_k > 0)) throw std::invalid_argument("compute_roots: mu_k > 0 required");
  const int n = 2 * a;
  const double radius = std::pow(std::pow(s0, n) * mu_k, 1.0 / n);
  // target = (-1)^{a+1} s0^{2a} mu_k: positive for odd a, negative for even a
  const bool positive_target = (a % 2 == 1);
  std::vector<cdouble> roots(n);
  for (int m = 0; m < n; ++m) {
    const double angle = positive_target
                             ? 2.0 * std::numbers::pi * m / n
                             : (std::numbers::pi + 2.0 * std::numbers::pi * m) / n;
    cdouble z = std::polar(radius, angle);
    if (std::abs(z.real()) < 1e-14 * radius) z.real(0.0);
    if (std::abs(z.imag()) < 1e-14 * radius) z.imag(0.0);
    roots[m] = z;
    if (std::abs(roots[m].real()) < 1e-9 * radius)
      throw std::runtime_error("compute_roots: purely imaginary root encountered");
  }
  std::sort(roots.begin(), roots.end(), [](const cdouble& x, const cdouble& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  // defining identity check
  const double target = (positive_target ? 1.0 : -1.0) * std::pow(s0, n) * mu_k;
  for (const auto& r : roots) {
    cdouble p = 1.0;
    for (int i = 0; i < n; ++i) p *= r;
    if (std::abs(p - target) > 1e-12 * std::abs(target) * n)
      throw std::runtime_error("compute_roots: power identity violated");
  }
  return roots;
}

std::vector<cdouble> compute_partial_fractions(const std::vector<cdouble>& roots) {
  const int n = static_cast<int>(roots.size());
  std::vector<cdouble> A(n);
  for (int l = 0; l < n; ++l) {
    cdouble prod = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == l) continue;
      const cdouble d = roots[l] - roots[j];
      if (std::abs(d) < 1e-12 * std::abs(roots[l]))
        throw std::runtime_error("compute_partial_fractions: coincident roots");
      prod *= d;
    }
    A[l] = 1.0 / prod;
  }
  // moment identities: sum A mu^m = 0 for m <= 2a-2, = 1 for m = 2a-1
  double scale = 0;
  for (const auto& r : roots) scale = std::max(scale, std::abs(r));
  for (int m = 0; m <= n - 1; ++m) {
    cdouble s = 0;
    for (int l = 0; l < n; ++l) s += A[l] * std::pow(roots[l], m);
    const cdouble want = (m == n - 1) ? cdouble{1.0, 0.0} : cdouble{0.0, 0.0};
    if (std::abs(s - want) > 1e-10)
      throw std::runtime_error("compute_partial_fractions: moment identity violated");
  }
  return A;
}

GroundRootChoice select_mu0_star(const std::vector<cdouble>& roots0) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : roots0)
    if (r.real() < 0) best = std::max(best, r.real());
  if (!std::isfinite(best))
    throw std::runtime_error("select_mu0_star: no root with negative real part");
  std::vector<cdouble> ties;
  for (const auto& r : roots0)
    if (std::abs(r.real() - best) <= 1e-12 * std::abs(best)) ties.push_back(r);
  // tie-break: the member of the (at most conjugate) pair with Im >= 0
  cdouble pick = ties.front();
  for (const auto& r : ties)
    if (r.imag() >= 0 && (pick.imag() < 0 || r.imag() < pick.imag())) pick = r;
  return {pick, best};
}

RootClassification classify_roots(const std::vector<cdouble>& roots, double mu0_tilde,
                                  double eps_mu, int k) {
  RootClassification c;
  const double res_tol = 1e-9 * std::max(1.0, std::abs(mu0_tilde));
  for (const auto& r : roots) {
    const double gap = r.real() - mu0_tilde;
    const bool res = std::abs(gap) < res_tol;
    if (res && k > 0)
      throw std::runtime_error(
          "classify_roots: resonant root for k > 0 contradicts eigenvalue monotonicity");
    c.resonant.push_back(res);
    const double s = gap + eps_mu;
    if (s == 0.0) throw std::runtime_error("classify_roots: vanishing sign argument");
    c.flags.push_back(s > 0 ? +1 : -1);
  }
  return c;
}

RootSystem make_root_system(int k, double mu_k, int a, double s0, double mu0_tilde,
                            double eps_mu) {
  RootSystem rs;
  rs.k = k;
  rs.mu_k = mu_k;
  rs.roots = compute_roots(mu_k, a, s0);
  rs.weights = compute_partial_fractions(rs.roots);
  auto c = classify_roots(rs.roots, mu0_tilde, eps_mu, k);
  rs.flags = std::move(c.flags);
  rs.resonant = std::move(c.resonant);
  return rs;
}

TailModel fit_tail(const RhoGridFunction& f, const std::vector<cdouble>& freqs,
                   double window_frac) {
  const RhoGrid& g = *f.grid;
  TailModel tm;
  const int i0 = g.index_at_or_above(g.rho_min + (1.0 - window_frac) * (g.rho_max() - g.rho_min));
  const int nw = g.n - i0;
  if (nw < 16 || freqs.empty()) return tm;
  double amax = 0;
  for (int i = i0; i < g.n; ++i) amax = std::max(amax, std::abs(f.v[i]));
  if (amax < 1e-280) return tm;  // nothing representable to extrapolate

  // Rescale by the dominant exponential so the regression is well conditioned.
  const double mu_t = freqs[0].real();
  const double s_lo = g.rho(i0);
  Eigen::VectorXcd y(nw);
  for (int i = 0; i < nw; ++i)
    y(i) = f.v[i0 + i] * std::exp(-mu_t * (g.rho(i0 + i) - s_lo));
  const int T = static_cast<int>(freqs.size());
  Eigen::MatrixXcd B(nw, T);

  auto solve_for_p = [&](double p, Eigen::VectorXcd* coef) -> double {
    for (int i = 0; i < nw; ++i) {
      const double s = g.rho(i0 + i);
      const double amp = std::pow(s, -p);
      for (int t = 0; t < T; ++t)
        B(i, t) = amp * std::exp((freqs[t] - cdouble(mu_t, 0.0)) * (s - s_lo));
    }
    Eigen::MatrixXcd G = B.adjoint() * B;
    Eigen::VectorXcd rhs = B.adjoint() * y;
    Eigen::VectorXcd c = G.ldlt().solve(rhs);
    const double resid = (B * c - y).norm() / std::max(1e-300, y.norm());
    if (coef) *coef = c;
    return resid;
  };

  double best_p = 0, best_res = std::numeric_limits<double>::infinity();
  for (double p = -1.0; p <= 20.0; p += 0.25) {
    const double r = solve_for_p(p, nullptr);
    if (r < best_res) {
      best_res = r;
      best_p = p;
    }
  }
  for (double step : {0.05, 0.01}) {
    double local_best = best_p;
    for (double p = best_p - 5 * step; p <= best_p + 5 * step; p += step) {
      const double r = solve_for_p(p, nullptr);
      if (r < best_res) {
        best_res = r;
        local_best = p;
      }
    }
    best_p = local_best;
  }
  Eigen::VectorXcd coef;
  tm.rel_residual = solve_for_p(best_p, &coef);
  tm.p = best_p;
  tm.sigma_ref = s_lo;
  for (int t = 0; t < T; ++t) tm.terms.emplace_back(freqs[t], coef(t));
  return tm;
}

namespace {

// int_S^inf e^{z (sigma - S)} sigma^{-p} dsigma by the integration-by-parts
// asymptotic series; valid for Re z <= 0, |z| S >> 1.
cdouble tail_power_integral(cdouble z, double p, double S) {
  if (std::abs(z) < 1e-12) {
    if (p <= 1.05)
      throw std::runtime_error(
          "tail integral: resonant future integral requires integrable tail (p > 1)");
    return std::pow(S, 1.0 - p) / (p - 1.0);
  }
  if (z.real() > 1e-12)
    throw std::runtime_error("tail integral: growing exponent");
  if (std::abs(z) * S < 8.0)
    throw std::runtime_error("tail integral: asymptotic series out of range");
  // I_p = -S^{-p}/z + (p/z) I_{p+1} gives term_m = term_{m-1} (p+m-1)/(z S)
  cdouble term = -std::pow(S, -p) / z;
  cdouble sum = term;
  for (int m = 1; m < 40; ++m) {
    term *= (p + m - 1.0) / (z * S);
    sum += term;
    if (std::abs(term) < 1e-14 * std::abs(sum)) break;
    if (std::abs(term) > 1e3 * std::abs(sum))
      throw std::runtime_error("tail integral: asymptotic series diverged");
  }
  return sum;
}

// Tail of the future kernel at the last grid node:
//   T = int_S^inf e^{mu (S - sigma)} f_model(sigma) dsigma.
cdouble future_tail(const TailModel& tm, cdouble mu, double S) {
  if (tm.empty()) return {0.0, 0.0};
  cdouble acc = 0;
  for (const auto& [nu, c] : tm.terms) {
    const cdouble z = nu - mu;
    const cdouble amp = c * std::exp(nu * (S - tm.sigma_ref));
    acc += amp * tail_power_integral(z, tm.p, S);
  }
  return acc;
}

}  // namespace

RhoGridFunction apply_Ikj(cdouble root, int flag, bool resonant, const RhoGridFunction& f,
                          double R, double mu0_tilde) {
  const RhoGrid& g = *f.grid;
  RhoGridFunction out(g);
  const int iR = g.nearest_index(R);
  if (std::abs(g.rho(iR) - R) > 0.25 * g.h)
    throw std::invalid_argument("apply_Ikj: R must lie on the grid");
  const cdouble z = -root * g.h;  // moment argument
  const auto G = exp_moments(z);
  AmplitudeFamily fam;

  auto interval_integral = [&](int i, int lo) -> cdouble {
    const auto a = fam.interval_coeffs(f.v, i, lo);
    cdouble acc = 0;
    for (int m = 0; m < kAmpOrder; ++m) acc += a[m] * G[m];
    return acc * g.h;
  };

  if (flag < 0) {
    // I(rho) = int_R^rho e^{root (rho - sigma)} f dsigma, forward recurrence
    const cdouble step = std::exp(root * g.h);
    for (int i = 0; i <= iR; ++i) out.v[i] = 0.0;
    for (int i = iR; i + 1 < g.n; ++i)
      out.v[i + 1] = step * (out.v[i] + interval_integral(i, iR));
  } else {
    // J(rho) = int_rho^inf e^{root (rho - sigma)} H(sigma - R) f dsigma, backward
    cdouble Jtop{0.0, 0.0};
    const bool needs_tail = resonant || (root.real() - mu0_tilde) < 0.75 * std::abs(mu0_tilde);
    if (f.tail.has_value()) {
      // an empty model states the data has died out before the grid edge
      Jtop = future_tail(*f.tail, root, g.rho_max());
    } else if (resonant) {
      throw std::runtime_error(
          "apply_Ikj: resonant future integral needs a tail model (missing decay tag)");
    } else if (needs_tail) {
      // weakly separated root with no tail: acceptable only if f has died out
      double edge = 0;
      for (int i = g.n - 8; i < g.n; ++i) edge = std::max(edge, std::abs(f.v[i]));
      double fmax = 0;
      for (const auto& x : f.v) fmax = std::max(fmax, std::abs(x));
      if (edge > 1e-10 * fmax)
        throw std::runtime_error("apply_Ikj: future integral tail exceeds tolerance");
    }
    const cdouble step = std::exp(-root * g.h);
    out.v[g.n - 1] = Jtop;
    for (int i = g.n - 2; i >= 0; --i) {
      cdouble contrib = (i >= iR) ? interval_integral(i, iR) : cdouble{0.0, 0.0};
      out.v[i] = step * out.v[i + 1] + contrib;
    }
    for (auto& x : out.v) x = -x;  // I = -J
  }
  return out;
}

RhoGridFunction apply_Ek(const RootSystem& rs, const RhoGridFunction& f, double R,
                         double mu0_tilde) {
  const RhoGrid& g = *f.grid;
  RhoGridFunction out(g);
  for (size_t j = 0; j < rs.roots.size(); ++j) {
    RhoGridFunction ij = apply_Ikj(rs.roots[j], rs.flags[j], rs.resonant[j], f, R, mu0_tilde);
    for (int i = 0; i < g.n; ++i) out.v[i] += rs.weights[j] * ij.v[i];
  }
  return out;
}

}  // namespace gevrey
