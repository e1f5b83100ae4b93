#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gsa/evaluator.hpp"
#include "gsa/kriging.hpp"  // EmulationLoopConfig / EmulationLoopReport
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"
#include "gsa/sobol_analysis.hpp"

namespace gsa {

// One hinge max(0, sign * (x_variable - knot)).
struct HingeFactor {
  int variable = 0;
  int sign = 1;  // +1 or -1
  double knot = 0.0;
};

// Product of up to three hinges on distinct variables.
struct BasisFunction {
  std::vector<HingeFactor> factors;

  double value(std::span<const double> x) const {
    double v = 1.0;
    for (const HingeFactor& f : factors) {
      const double h = f.sign * (x[f.variable] - f.knot);
      if (h <= 0.0) return 0.0;
      v *= h;
    }
    return v;
  }
};

// One posterior draw of the spline surface plus its noise level.
struct BassSample {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<BasisFunction> bases;
  double noise_variance = 0.0;

  double value(std::span<const double> x) const {
    double v = intercept;
    for (std::size_t m = 0; m < bases.size(); ++m)
      v += coefficients[m] * bases[m].value(x);
    return v;
  }
};

struct McmcConfig {
  std::int64_t chain_length = 500000;
  std::int64_t burn_in = 100000;
  std::int64_t thin = 1000;

  static McmcConfig paper_profile() { return {500000, 100000, 1000}; }
  static McmcConfig desk_profile() { return {50000, 10000, 100}; }

  std::int64_t expected_samples() const {
    return (chain_length - burn_in) / thin;
  }
};

struct BassPrior {
  double lambda_shape = 10.0;  // lambda ~ Gamma(shape, rate), mean 1
  double lambda_rate = 10.0;
  int max_bases = 1000;
  int max_degree = 3;  // capped further at the input dimension
  // Zellner precision on the coefficients. g > 0 fixes it; the default
  // (g <= 0) learns tau = 1/g under tau ~ Gamma(tau_shape, tau_shape*n),
  // whose prior mean 1/n centers g on the unit-information value n while
  // letting a near-interpolating fit push g up and the noise floor down.
  double g = -1.0;
  double tau_shape = 0.5;
  // Bases must be nonzero on at least min(min_support, ceil(0.1 n)) training
  // points; proposals below that are rejected as degenerate. Keeps hinges
  // from hanging on one or two points and exploding away from the data.
  int min_support = 20;
};

struct BassPosterior {
  std::vector<BassSample> samples;
  McmcConfig mcmc;
  int dimension = 0;
};

// Reversible-jump MCMC over the number and shape of hinge bases, with
// coefficients integrated out of the acceptance ratio under a conjugate
// g-prior. Deterministic given the seed.
BassPosterior fit_bass(const SampleMatrix& x, std::span<const double> y,
                       const McmcConfig& mcmc, const BassPrior& prior,
                       Seed seed);

// Ensemble mean and standard deviation across posterior samples at x.
struct BassPrediction {
  double mean = 0.0;
  double sd = 0.0;
};
BassPrediction bass_predict(const BassPosterior& posterior,
                            std::span<const double> x);

// Per-sample evaluations over many points; rows = points, cols = samples.
void bass_predict_block(const BassPosterior& posterior,
                        const Eigen::MatrixXd& points, Eigen::VectorXd* mean,
                        Eigen::VectorXd* sd);

// Exact hinge moments over U(0,1): c1 = E[h], e = E[h_f h_g] (same variable).
double hinge_moment_c1(const HingeFactor& f);
double hinge_cross_moment_e(const HingeFactor& f, const HingeFactor& g);

// Sobol' indices computed in closed form from each posterior sample, with
// ensemble mean and a central 95% band across samples.
struct BassSobolEnsemble {
  std::vector<SobolIndices> per_sample;
  SobolIndices mean;
  std::vector<double> first_lower, first_upper;
  std::vector<double> total_lower, total_upper;
};
BassSobolEnsemble bass_sobol(const BassPosterior& posterior, int d,
                             bool second_order = false);

// Grow-until-accurate loop mirroring the Kriging one, with the ensemble sd
// across posterior samples as the pool accuracy metric.
EmulationLoopReport<BassPosterior> bass_emulation_loop(
    const Evaluator& f, int d, Seed seed, const McmcConfig& mcmc,
    const BassPrior& prior = {}, const EmulationLoopConfig& loop_config = {},
    const LoopObserver<BassPosterior>& observer = {});

}  // namespace gsa
