#include "gevrey/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gevrey {

Rational compute_s0(int q, int a) {
  if (q < 2) throw std::invalid_argument("compute_s0: q >= 2 required");
  if (a < 1) throw std::invalid_argument("compute_s0: a >= 1 required");
  // 1/s0 = 1 - (q-1)/(a q) = (a q - q + 1)/(a q)
  Rational inv(static_cast<long>(a) * q - q + 1, static_cast<long>(a) * q);
  Rational s0 = Rational(1) / inv;
  s0.canonicalize();
  return s0;
}

GammaTable compute_gamma_table(int a, const Rational& s0) {
  if (a < 1) throw std::invalid_argument("compute_gamma_table: a >= 1 required");
  if (s0 <= 1) throw std::invalid_argument("compute_gamma_table: s0 > 1 required");
  const int top = 2 * a;
  GammaTable t;
  t.a = a;
  t.s0 = s0;
  t.entries.assign(top + 1, {});
  t.entries[0] = {CRational(Rational(1))};
  // One application of L maps the term c rho^{-(m s0 - h)} d^h onto
  //   (i s0)^{-1} c (1 - s0 - m s0 + h) rho^{-((m+1) s0 - h)} d^h
  // + (i s0)^{-1} c rho^{-((m+1) s0 - (h+1))} d^{h+1}.
  const CRational inv_is0 = CRational(Rational(1)) / (CRational::i_unit() * CRational(s0));
  for (int m = 0; m < top; ++m) {
    std::vector<CRational> next(m + 2, CRational());
    for (int h = 0; h <= m; ++h) {
      const CRational& c = t.entries[m][h];
      if (c.is_zero()) continue;
      Rational factor = Rational(1) - s0 - Rational(m) * s0 + Rational(h);
      next[h] += inv_is0 * (CRational(factor) * c);
      next[h + 1] += inv_is0 * c;
    }
    t.entries[m + 1] = std::move(next);
  }
  return t;
}

cdouble pochhammer(cdouble lambda, int beta) {
  if (beta < 0) throw std::invalid_argument("pochhammer: beta >= 0 required");
  cdouble out = 1.0;
  for (int i = 0; i < beta; ++i) out *= (lambda - cdouble(double(i), 0.0));
  return out;
}

CRational pochhammer_exact(const CRational& lambda, int beta) {
  if (beta < 0) throw std::invalid_argument("pochhammer: beta >= 0 required");
  CRational out{Rational(1)};
  for (int i = 0; i < beta; ++i) out = out * (lambda - CRational(Rational(i)));
  return out;
}

std::vector<Rational> build_pk_polynomial(int k, const Rational& s0, int q) {
  if (k < 0) throw std::invalid_argument("build_pk_polynomial: k >= 0 required");
  std::vector<Rational> poly{Rational(1)};
  const Rational c = s0 / Rational(q);
  for (int m = 0; m < k; ++m) {
    // multiply by (c t - m)
    std::vector<Rational> next(poly.size() + 1, Rational(0));
    for (size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += c * poly[i];
      next[i] -= Rational(m) * poly[i];
    }
    poly = std::move(next);
  }
  return poly;
}

static long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TransportOperators build_transport_symbols(int q, int a, const Rational& s0,
                                           const GammaTable& gamma, const CRational& r) {
  const int top = 2 * a;
  TransportOperators ops;
  ops.p0.order = top;
  ops.p0.s0_pow_neg2a = rational_pow(s0, -top);
  ops.p0.coeff_d = ((a % 2 == 0) ? 1.0 : -1.0) * to_double(ops.p0.s0_pow_neg2a);

  // Pochhammer argument R = r + 2 s0/q + 2 s0 (q-1)/q.
  const CRational R = r + CRational(Rational(2) * s0 / Rational(q)) +
                      CRational(Rational(2) * s0 * Rational(q - 1) / Rational(q));

  std::vector<std::vector<Rational>> pk(top + 1);
  for (int k = 0; k <= top; ++k) pk[k] = build_pk_polynomial(k, s0, q);

  ops.pj.clear();
  for (int j = 1; j <= top; ++j) {
    TransportSymbol sym;
    sym.j = j;
    sym.rho_order = top - j;
    sym.poly.assign(j + 1, CRational());
    for (int h = top - j; h <= top; ++h) {
      for (int alpha = top - j; alpha <= h; ++alpha) {
        const int kdeg = alpha + j - top;  // degree index of p_k
        CRational term = CRational(Rational(binom(h, alpha))) * gamma.at(top, h);
        term = term * pochhammer_exact(R, h - alpha);
        term = term * CRational(Rational(binom(alpha, top - j)));
        const auto& pkc = pk[kdeg];
        for (size_t l = 0; l < pkc.size(); ++l)
          sym.poly[l] += term * CRational(pkc[l]);
      }
    }
    while (sym.poly.size() > 1 && sym.poly.back().is_zero()) sym.poly.pop_back();
    sym.poly_d.resize(sym.poly.size());
    for (size_t l = 0; l < sym.poly.size(); ++l) sym.poly_d[l] = sym.poly[l].to_complex();
    ops.pj.push_back(std::move(sym));
  }
  return ops;
}

CRational choose_r(int q, int a, const Rational& s0, const GammaTable& gamma,
                   double ground_state_pairing) {
  const int top = 2 * a;
  const CRational g2a = gamma.at(top, top);
  const CRational g2am1 = gamma.at(top, top - 1);
  if (g2a.is_zero()) throw std::domain_error("choose_r: vanishing top gamma coefficient");
  // P1 = (2a g2a (p1(t) + r + 2 s0/q + 2 s0 (q-1)/q) + g2am1) d^{2a-1}
  //    = (alpha t + beta + 2a g2a r) d^{2a-1}
  const CRational two_a{Rational(2 * a)};
  const CRational alpha = two_a * g2a * CRational(s0 / Rational(q));
  const CRational beta = two_a * g2a *
                             CRational(Rational(2) * s0 / Rational(q) +
                                       Rational(2) * s0 * Rational(q - 1) / Rational(q)) +
                         g2am1;
  const CRational pairing{rational_from_double(ground_state_pairing)};
  return (CRational(Rational(0)) - (alpha * pairing + beta)) / (two_a * g2a);
}

Weights select_weights(int q, int a, int K_modes,
                       const std::vector<std::vector<cdouble>>& roots_per_mode,
                       double mu0_tilde, double R0_default,
                       std::optional<double> delta_override,
                       std::optional<double> kappa_override) {
  if (static_cast<int>(roots_per_mode.size()) < K_modes + 1)
    throw std::invalid_argument("select_weights: root systems for modes 0..K required");
  const double s0 = to_double(compute_s0(q, a));
  Weights w;
  w.delta = delta_override.value_or(0.9);
  w.kappa = kappa_override.value_or(std::min(0.995, std::max(0.62, 0.5 * (1.0 + 1.0 / s0))));
  if (!(w.delta > 0 && w.delta < 1))
    throw std::invalid_argument("select_weights: delta must lie in (0,1)");
  if (!(w.kappa > 1.0 / s0 && w.kappa < 1.0))
    throw std::invalid_argument("select_weights: kappa must lie in (1/s0, 1)");
  if (!(w.kappa * w.delta > 0.5))
    throw std::invalid_argument("select_weights: kappa*delta > 1/2 violated");
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& roots : roots_per_mode) {
    for (const auto& mu : roots) {
      const double gap = std::abs(mu.real() - mu0_tilde);
      if (gap > 1e-9) min_gap = std::min(min_gap, gap);
    }
  }
  if (!std::isfinite(min_gap))
    throw std::domain_error("select_weights: no nonresonant roots found");
  w.eps_mu = 0.5 * min_gap;
  w.R0 = R0_default;
  w.gamma_sharp = 2 * a + 2;
  return w;
}

void ModelParams::validate() const {
  std::ostringstream err;
  const Rational inv = Rational(1) / s0;
  const Rational expect = Rational(static_cast<long>(a) * q - q + 1, static_cast<long>(a) * q);
  if (inv != expect) err << "1/s0 != 1 - (q-1)/(a q); ";
  if (!(delta > 0 && delta < 1)) err << "delta not in (0,1); ";
  if (!(kappa > 1.0 / s0_d && kappa < 1.0)) err << "kappa not in (1/s0,1); ";
  if (!(kappa * delta > 0.5)) err << "kappa*delta <= 1/2; ";
  if (gamma_sharp < 2 * a) err << "gamma_sharp < 2a; ";
  if (!(mu0_tilde < 0)) err << "mu0_tilde not negative; ";
  if (!(eps_mu > 0)) err << "eps_mu not positive; ";
  if (!(R0 > 0)) err << "R0 not positive; ";
  const std::string s = err.str();
  if (!s.empty()) throw std::domain_error("ModelParams invalid: " + s);
}

}  // namespace gevrey
