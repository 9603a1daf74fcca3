#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gevrey {

// A configuration error carries the violated constraint; maps to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical-tolerance failure; maps to exit code 3.
struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double eigen_residual = 1e-6;
  double ode_residual = 1e-6;
  double transport_residual = 1e-4;
  double fourier_crosscheck = 0.05;
};

struct RunConfig {
  int q = 2;
  int a = 1;
  int K = 32;
  int J = 6;
  // x-grid; zero means "derive from q and K"
  double L = 0;
  int N = 0;
  // rho-grid
  double rho_max = 160.0;
  double h_rho = 0.02;
  double R0 = 2.0;
  std::optional<double> delta;
  std::optional<double> kappa;
  std::string spectrum_backend = "fd";  // "fd" | "hermite"
  Tolerances tol;
  std::string output_dir = "out";
  int threads = 1;
  bool skip_numeric_ft = false;
  bool dump_eigenfunctions = false;

  // Fill derived defaults (L, N) and check every module precondition;
  // throws ConfigError naming the violated constraint.
  void finalize_and_validate();
};

RunConfig load_config_file(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

}  // namespace gevrey
