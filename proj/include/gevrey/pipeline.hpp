#pragma once

#include "gevrey/assembly.hpp"
#include "gevrey/config.hpp"

#include <map>
#include <memory>
#include <string>

namespace gevrey {

enum class Stage { SpectrumOnly, Witness, Analyze };

struct PipelineResult {
  RunConfig cfg;
  Rational s0;
  GammaTable gamma;
  ModelParams params;
  TransportOperators ops;
  Spectrum spec;
  std::unique_ptr<RhoGrid> rho;
  std::unique_ptr<TransportContext> ctx;
  TransportRun transport;
  CutoffFamily cutoffs;
  WitnessFunction witness;
  int beta = 0;
  FourierProfile profile;
  GevreyFit fit;
  STermsReport sterms;
  double certificate_spread = 0;  // max/min of the lower-bound certificate
  double pi_p1_u0 = 0;
  double pi_p1_pi = 0;
  std::map<std::string, double> timings;
};

// Runs the pipeline through the requested stage. Throws ConfigError for
// precondition violations and ToleranceError (or std::runtime_error) for
// numerical failures.
PipelineResult run_pipeline(RunConfig cfg, Stage stage);

// Writes the stage artifacts (CSV/JSON + manifest) into cfg.output_dir.
void write_artifacts(const PipelineResult& r, Stage stage);

}  // namespace gevrey
