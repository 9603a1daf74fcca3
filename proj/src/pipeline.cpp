#include "gevrey/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gevrey {

namespace {

class Timer {
 public:
  explicit Timer(std::map<std::string, double>& sink, std::string key)
      : sink_(sink), key_(std::move(key)), t0_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    sink_[key_] = std::chrono::duration<double>(dt).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string key_;
  std::chrono::steady_clock::time_point t0_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmtc(const cdouble& v) {
  return fmt(v.real()) + (v.imag() >= 0 ? "+" : "") + fmt(v.imag()) + "i";
}

}  // namespace

PipelineResult run_pipeline(RunConfig cfg, Stage stage) {
  cfg.finalize_and_validate();
  PipelineResult r;
  r.cfg = cfg;
  r.s0 = compute_s0(cfg.q, cfg.a);
  r.gamma = compute_gamma_table(cfg.a, r.s0);

  {
    Timer t(r.timings, "spectrum");
    XGrid grid(cfg.L, cfg.N);
    r.spec = (cfg.spectrum_backend == "hermite")
                 ? solve_eigenpairs_hermite(cfg.q, cfg.K, grid)
                 : solve_eigenpairs(cfg.q, cfg.K, grid, cfg.tol.eigen_residual);
  }
  if (stage == Stage::SpectrumOnly) return r;

  {
    Timer t(r.timings, "model");
    std::vector<std::vector<cdouble>> roots_per_mode;
    const double s0d = to_double(r.s0);
    for (int k = 0; k <= cfg.K; ++k)
      roots_per_mode.push_back(compute_roots(r.spec.mu[k], cfg.a, s0d));
    auto ground = select_mu0_star(roots_per_mode[0]);
    Weights w = select_weights(cfg.q, cfg.a, cfg.K, roots_per_mode, ground.mu0_tilde, cfg.R0,
                               cfg.delta, cfg.kappa);
    Eigen::MatrixXd xdx = coupling_matrix(r.spec, CouplingKind::XDx);
    const double pairing = xdx(0, 0);
    CRational r_exact = choose_r(cfg.q, cfg.a, r.s0, r.gamma, pairing);
    r.ops = build_transport_symbols(cfg.q, cfg.a, r.s0, r.gamma, r_exact);
    r.params.q = cfg.q;
    r.params.a = cfg.a;
    r.params.s0 = r.s0;
    r.params.s0_d = s0d;
    r.params.r = r_exact;
    r.params.r_d = r_exact.to_complex();
    r.params.mu0_star = ground.mu0_star;
    r.params.mu0_tilde = ground.mu0_tilde;
    r.params.eps_mu = w.eps_mu;
    r.params.delta = w.delta;
    r.params.kappa = w.kappa;
    r.params.R0 = w.R0;
    r.params.gamma_sharp = w.gamma_sharp;
    r.params.validate();
  }

  r.rho = std::make_unique<RhoGrid>(cfg.R0, cfg.rho_max, cfg.h_rho);
  r.ctx = std::make_unique<TransportContext>(make_transport_context(
      r.spec, *r.rho, r.params, r.ops, cfg.tol.transport_residual, cfg.threads));
  {
    Timer t(r.timings, "transport");
    r.transport = run_transport(*r.ctx, cfg.J);
  }
  r.pi_p1_u0 = pi_p1_u0_magnitude(*r.ctx, r.transport.fields[0]);
  r.pi_p1_pi = pi_p1_pi_magnitude(*r.ctx);
  if (stage == Stage::Witness) return r;

  {
    Timer t(r.timings, "assembly");
    r.cutoffs = build_cutoffs(r.params, cfg.J, *r.rho);
    r.witness = assemble_v(*r.ctx, r.cutoffs, r.transport.fields);
    r.beta = select_beta(r.spec);
    r.profile = closed_form_fourier(*r.ctx, r.witness, r.beta,
                                    default_eta_window(*r.ctx, 48));
  }
  if (!cfg.skip_numeric_ft) {
    Timer t(r.timings, "numeric_ft");
    ProfileIntegral av(*r.ctx, r.witness, r.beta);
    // crosscheck samples restricted to the dynamic range a windowed transform
    // can resolve: about six orders below the profile peak
    const double s0d = r.params.s0_d;
    double rho_peak = 3.0 * r.params.R0;
    {
      auto v0 = witness_at_zero(*r.ctx, r.witness, r.beta);
      double best = 0;
      for (int i = 0; i < r.rho->n; ++i) {
        const double mag = std::abs(v0[i]) * std::pow(r.rho->rho(i), r.profile.lambda_prime);
        if (mag > best) {
          best = mag;
          rho_peak = r.rho->rho(i);
        }
      }
    }
    const double eta_cap =
        std::pow(rho_peak + std::log(1e6) / std::abs(r.params.mu0_tilde), s0d);
    std::vector<double> samples;
    for (double e : r.profile.eta)
      if (e <= eta_cap) samples.push_back(e);
    const size_t want = 14;
    if (samples.size() < want)
      samples.assign(r.profile.eta.begin(),
                     r.profile.eta.begin() + std::min(want, r.profile.eta.size()));
    CrosscheckOptions opt;
    opt.rel_tol = cfg.tol.fourier_crosscheck;
    opt.threads = cfg.threads;
    numeric_fourier_crosscheck(*r.ctx, av, r.profile, samples, opt);
  }
  {
    Timer t(r.timings, "analysis");
    r.fit = gevrey_index_fit(*r.ctx, r.profile);
    r.sterms = compute_S_terms(*r.ctx, r.cutoffs, r.transport.fields);
    double cmin = 1e300, cmax = 0;
    for (double c : r.profile.certificate) {
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    r.certificate_spread = cmax / std::max(1e-300, cmin);
  }
  return r;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
}

nlohmann::json params_json(const PipelineResult& r) {
  nlohmann::json p;
  p["q"] = r.params.q;
  p["a"] = r.params.a;
  p["s0"] = {{"exact", to_string(r.params.s0)}, {"value", r.params.s0_d}};
  p["r"] = {{"exact", r.params.r.str()},
            {"re", r.params.r_d.real()},
            {"im", r.params.r_d.imag()}};
  p["mu0_star"] = {{"re", r.params.mu0_star.real()}, {"im", r.params.mu0_star.imag()}};
  p["mu0_tilde"] = r.params.mu0_tilde;
  p["eps_mu"] = r.params.eps_mu;
  p["delta"] = r.params.delta;
  p["kappa"] = r.params.kappa;
  p["R0"] = r.params.R0;
  p["gamma_sharp"] = r.params.gamma_sharp;
  return p;
}

nlohmann::json gamma_json(const GammaTable& g) {
  nlohmann::json out = nlohmann::json::array();
  for (size_t m = 0; m < g.entries.size(); ++m)
    for (size_t h = 0; h < g.entries[m].size(); ++h) {
      nlohmann::json e;
      e["m"] = m;
      e["h"] = h;
      e["exact"] = g.entries[m][h].str();
      e["re"] = g.value(m, h).real();
      e["im"] = g.value(m, h).imag();
      out.push_back(e);
    }
  return out;
}

}  // namespace

void write_artifacts(const PipelineResult& r, Stage stage) {
  namespace fs = std::filesystem;
  const fs::path dir(r.cfg.output_dir);
  fs::create_directories(dir);

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["config"] = nlohmann::json::parse(config_to_json(r.cfg));
  manifest["sign_convention"] =
      "phi_k positive at the first x > 0 where |phi_k| exceeds half its max";

  {
    std::string csv = "k,mu,residual,richardson_delta\n";
    for (int k = 0; k <= r.spec.K; ++k)
      csv += std::to_string(k) + "," + fmt(r.spec.mu[k]) + "," + fmt(r.spec.residual[k]) +
             "," + fmt(r.spec.richardson_delta[k]) + "\n";
    write_text(dir / "spectrum.csv", csv);
  }
  if (r.cfg.dump_eigenfunctions) {
    std::ofstream bin(dir / "eigenfunctions.bin", std::ios::binary);
    for (const auto& row : r.spec.phi)
      bin.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    nlohmann::json hdr;
    hdr["schema_version"] = 1;
    hdr["L"] = r.spec.grid.L;
    hdr["N"] = r.spec.grid.N;
    hdr["h"] = r.spec.grid.h;
    hdr["modes"] = r.spec.K + 1;
    hdr["layout"] = "row-major float64, mode-major";
    write_text(dir / "eigenfunctions.json", hdr.dump(2));
  }
  if (stage == Stage::SpectrumOnly) {
    write_text(dir / "manifest.json", manifest.dump(2));
    nlohmann::json t(r.timings);
    write_text(dir / "timings.json", t.dump(2));
    return;
  }

  manifest["params"] = params_json(r);
  manifest["gamma_table"] = gamma_json(r.gamma);
  {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& rs : r.ctx->roots) {
      nlohmann::json e;
      e["k"] = rs.k;
      e["mu_k"] = rs.mu_k;
      nlohmann::json rr = nlohmann::json::array();
      for (size_t i = 0; i < rs.roots.size(); ++i) {
        rr.push_back({{"re", rs.roots[i].real()},
                      {"im", rs.roots[i].imag()},
                      {"weight_re", rs.weights[i].real()},
                      {"weight_im", rs.weights[i].imag()},
                      {"direction", rs.flags[i]},
                      {"resonant", static_cast<bool>(rs.resonant[i])}});
      }
      e["roots"] = rr;
      roots.push_back(e);
    }
    manifest["root_systems"] = roots;
  }

  // per-level tables and decay reports
  nlohmann::json decay = nlohmann::json::array();
  for (size_t j = 0; j < r.transport.fields.size(); ++j) {
    const auto& f = r.transport.fields[j];
    std::string csv = "rho,norm,abs_c0,residual\n";
    for (int i = 0; i < r.rho->n; ++i) {
      const double res =
          (j >= 1 && i < static_cast<int>(r.transport.residual_profiles[j - 1].size()))
              ? r.transport.residual_profiles[j - 1][i]
              : 0.0;
      csv += fmt(r.rho->rho(i)) + "," + fmt(f.c.col(i).norm()) + "," +
             fmt(std::abs(f.c(0, i))) + "," + fmt(res) + "\n";
    }
    write_text(dir / ("u" + std::to_string(j) + ".csv"), csv);
    const auto& d = r.transport.decay[j];
    decay.push_back({{"j", d.j},
                     {"measured_exponent", d.measured_exponent},
                     {"target_exponent", d.target_exponent},
                     {"window", {d.window_lo, d.window_hi}},
                     {"fit_rms", d.fit_rms},
                     {"envelope_c", f.envelope.c},
                     {"envelope_beta", f.envelope.beta}});
  }
  nlohmann::json resid = nlohmann::json::array();
  for (const auto& res : r.transport.residuals)
    resid.push_back({{"j", res.j}, {"tr1", res.tr1}, {"tr2", res.tr2}});
  manifest["transport"] = {{"residuals", resid},
                           {"telescope", r.transport.telescope},
                           {"pi_p1_u0", r.pi_p1_u0},
                           {"pi_p1_pi", r.pi_p1_pi}};
  write_text(dir / "decay_report.json", decay.dump(2));

  if (stage == Stage::Witness) {
    write_text(dir / "manifest.json", manifest.dump(2));
    nlohmann::json t(r.timings);
    write_text(dir / "timings.json", t.dump(2));
    return;
  }

  manifest["witness"] = {{"J", r.witness.J},
                         {"dominance_ratio", r.witness.dominance_ratio},
                         {"beta", r.beta}};
  {
    std::string csv = "eta,abs_closed,abs_numeric,numeric_err,certificate\n";
    for (size_t i = 0; i < r.profile.eta.size(); ++i) {
      const double an = r.profile.numeric.empty() ? 0.0 : std::abs(r.profile.numeric[i]);
      const double ae = r.profile.numeric_err.empty() ? 0.0 : r.profile.numeric_err[i];
      csv += fmt(r.profile.eta[i]) + "," + fmt(std::abs(r.profile.closed_form[i])) + "," +
             fmt(an) + "," + fmt(ae) + "," + fmt(r.profile.certificate[i]) + "\n";
    }
    write_text(dir / "fourier_profile.csv", csv);
  }
  {
    nlohmann::json fit;
    fit["slope"] = r.fit.slope;
    fit["slope_ci"] = r.fit.slope_ci;
    fit["rate"] = r.fit.rate;
    fit["rate_ci"] = r.fit.rate_ci;
    fit["fit_rms"] = r.fit.fit_rms;
    fit["target_slope"] = 1.0 / r.params.s0_d;
    fit["target_rate"] = std::abs(r.params.mu0_tilde);
    fit["lambda_prime"] = r.profile.lambda_prime;
    fit["certificate_spread"] = r.certificate_spread;
    fit["schema_version"] = 1;
    write_text(dir / "gevrey_fit.json", fit.dump(2));
    manifest["gevrey_fit"] = fit;
  }
  {
    std::string csv = "j,band_lo,band_hi,s1_sup,s2_sup\n";
    for (size_t j = 0; j < r.sterms.s2_band_sup.size(); ++j)
      csv += std::to_string(j) + "," + fmt(r.sterms.band_lo[j]) + "," +
             fmt(r.sterms.band_hi[j]) + "," + fmt(r.sterms.s1_band_sup[j]) + "," +
             fmt(r.sterms.s2_band_sup[j]) + "\n";
    write_text(dir / "s_terms.csv", csv);
    manifest["s_terms"] = {{"band_fit_c", r.sterms.band_fit_c},
                           {"rholog_slope", r.sterms.rholog_slope},
                           {"support_leak", r.sterms.support_leak},
                           {"f10_norm", r.sterms.f10_norm}};
  }
  {
    std::string rep;
    rep += "analysis report\n";
    rep += "===============\n";
    rep += "instance: q=" + std::to_string(r.params.q) + " a=" + std::to_string(r.params.a) +
           "\n";
    rep += "target 1/s0 = " + fmt(1.0 / r.params.s0_d) + " (s0 = " + to_string(r.params.s0) +
           ")\n";
    rep += "fitted slope = " + fmt(r.fit.slope) + " +- " + fmt(r.fit.slope_ci) + "\n";
    rep += "target rate  = " + fmt(std::abs(r.params.mu0_tilde)) + "\n";
    rep += "fitted rate  = " + fmt(r.fit.rate) + " +- " + fmt(r.fit.rate_ci) + "\n";
    rep += "dominance ratio = " + fmt(r.witness.dominance_ratio) + "\n";
    rep += "certificate spread = " + fmt(r.certificate_spread) + "\n";
    write_text(dir / "report.txt", rep);
  }
  write_text(dir / "manifest.json", manifest.dump(2));
  nlohmann::json t(r.timings);
  write_text(dir / "timings.json", t.dump(2));
}

}  // namespace gevrey
