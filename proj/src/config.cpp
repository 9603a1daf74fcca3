#include "gevrey/config.hpp"

#include "gevrey/model.hpp"
#include "gevrey/spectrum.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace gevrey {

namespace {

// WKB tail integral int_{x_t}^{L} sqrt(V - mu) dx controlling the Dirichlet
// truncation error of the highest retained mode.
double truncation_exponent(int q, double mu, double L) {
  const double xt = std::pow(mu, 1.0 / (2.0 * (q - 1)));
  if (L <= xt) return 0.0;
  const int steps = 400;
  double acc = 0;
  for (int i = 0; i < steps; ++i) {
    const double x0 = xt + (L - xt) * i / steps;
    const double x1 = xt + (L - xt) * (i + 1) / steps;
    auto f = [&](double x) {
      return std::sqrt(std::max(0.0, std::pow(x, 2.0 * (q - 1)) - mu));
    };
    acc += 0.5 * (f(x0) + f(x1)) * (x1 - x0);
  }
  return acc;
}

}  // namespace

void RunConfig::finalize_and_validate() {
  std::ostringstream err;
  if (q < 2) err << "q >= 2 required; ";
  if (a < 1) err << "a >= 1 required; ";
  if (K < 4) err << "K >= 4 required; ";
  if (J < 0) err << "J >= 0 required; ";
  if (R0 <= 0) err << "R0 > 0 required; ";
  if (threads < 1) err << "threads >= 1 required; ";
  if (tol.eigen_residual <= 0 || tol.ode_residual <= 0 || tol.transport_residual <= 0 ||
      tol.fourier_crosscheck <= 0)
    err << "tolerances must be positive; ";
  if (!err.str().empty()) throw ConfigError("invalid config: " + err.str());

  const double muK = mu_estimate_wkb(q, K);
  if (L == 0) {
    L = std::pow(muK, 1.0 / (2.0 * (q - 1))) + 0.5;
    while (truncation_exponent(q, muK, L) < 12.0) L += 0.25;
    L = std::ceil(L * 2.0) / 2.0;
  }
  if (N == 0) {
    const double h_target = std::min(0.006, 2.0 * L / 3200.0);
    int n = static_cast<int>(std::ceil(2.0 * L / h_target));
    n = ((n + 3) / 4) * 4;  // (N-1) divisible by 4
    N = n + 1;
  }
  if (N % 2 == 0 || (N - 1) % 4 != 0) err << "N must be odd with N-1 divisible by 4; ";
  if ((K + 1) * 10 > N) err << "K too large for the x-grid (need K+1 << N); ";
  if (std::pow(L, 2.0 * (q - 1)) < muK * 1.2 + 10.0)
    err << "L^(2(q-1)) must dominate mu_K; ";
  if (truncation_exponent(q, muK, L) < 6.0)
    err << "x-domain too small for the highest retained mode; ";

  const double s0 = to_double(compute_s0(q, a));
  if (rho_max < 6.0 * R0 * (J + 1) + 10.0)
    err << "rho_max must exceed 6 R0 (J+1) plus margin; ";
  // the Gevrey fit needs >= 1.5 decades above the lower-bound floor
  if (std::pow(0.9 * rho_max, s0) < std::pow(6.0 * R0, s0) * 1.2 * 31.7)
    err << "rho_max too small for a 1.5-decade eta window; ";
  if (h_rho <= 0 || h_rho > R0 / 16.0)
    err << "h_rho must resolve the cutoff transitions (<= R0/16); ";
  const double dd = delta.value_or(0.9);
  const double kk = kappa.value_or(std::min(0.995, std::max(0.62, 0.5 * (1.0 + 1.0 / s0))));
  if (!(dd > 0 && dd < 1)) err << "delta must lie in (0,1); ";
  if (!(kk > 1.0 / s0 && kk < 1)) err << "kappa must lie in (1/s0,1); ";
  if (!(kk * dd > 0.5)) err << "kappa*delta > 1/2 required; ";
  if (spectrum_backend != "fd" && spectrum_backend != "hermite")
    err << "spectrum_backend must be fd or hermite; ";
  const std::string s = err.str();
  if (!s.empty()) throw ConfigError("invalid config: " + s);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not readable: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("q", cfg.q);
  get("a", cfg.a);
  get("K", cfg.K);
  get("J", cfg.J);
  get("R0", cfg.R0);
  get("threads", cfg.threads);
  get("output_dir", cfg.output_dir);
  get("spectrum_backend", cfg.spectrum_backend);
  get("skip_numeric_ft", cfg.skip_numeric_ft);
  get("dump_eigenfunctions", cfg.dump_eigenfunctions);
  if (j.contains("delta") && !j.at("delta").is_null()) cfg.delta = j.at("delta").get<double>();
  if (j.contains("kappa") && !j.at("kappa").is_null()) cfg.kappa = j.at("kappa").get<double>();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.contains("L")) cfg.L = g.at("L").get<double>();
    if (g.contains("N")) cfg.N = g.at("N").get<int>();
    if (g.contains("rho_max")) cfg.rho_max = g.at("rho_max").get<double>();
    if (g.contains("h_rho")) cfg.h_rho = g.at("h_rho").get<double>();
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("eigen_residual")) cfg.tol.eigen_residual = t.at("eigen_residual");
    if (t.contains("ode_residual")) cfg.tol.ode_residual = t.at("ode_residual");
    if (t.contains("transport_residual"))
      cfg.tol.transport_residual = t.at("transport_residual");
    if (t.contains("fourier_crosscheck"))
      cfg.tol.fourier_crosscheck = t.at("fourier_crosscheck");
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["q"] = cfg.q;
  j["a"] = cfg.a;
  j["K"] = cfg.K;
  j["J"] = cfg.J;
  j["R0"] = cfg.R0;
  j["grid"] = {{"L", cfg.L}, {"N", cfg.N}, {"rho_max", cfg.rho_max}, {"h_rho", cfg.h_rho}};
  if (cfg.delta)
    j["delta"] = *cfg.delta;
  else
    j["delta"] = nullptr;
  if (cfg.kappa)
    j["kappa"] = *cfg.kappa;
  else
    j["kappa"] = nullptr;
  j["spectrum_backend"] = cfg.spectrum_backend;
  j["tolerances"] = {{"eigen_residual", cfg.tol.eigen_residual},
                     {"ode_residual", cfg.tol.ode_residual},
                     {"transport_residual", cfg.tol.transport_residual},
                     {"fourier_crosscheck", cfg.tol.fourier_crosscheck}};
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["skip_numeric_ft"] = cfg.skip_numeric_ft;
  j["dump_eigenfunctions"] = cfg.dump_eigenfunctions;
  return j.dump(2);
}

}  // namespace gevrey
