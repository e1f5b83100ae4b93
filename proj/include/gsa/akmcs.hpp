#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsa/evaluator.hpp"
#include "gsa/kriging.hpp"
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

// Learning function steering the adaptive loop: UncertaintySd targets the
// largest predictive sd; ThresholdU targets points whose prediction sits
// close to a threshold level relative to its sd.
struct LearningFunction {
  enum class Kind { UncertaintySd, ThresholdU };
  Kind kind = Kind::UncertaintySd;
  double threshold_l = 0.0;  // used by ThresholdU only

  static LearningFunction uncertainty_sd() { return {}; }
  static LearningFunction threshold_u(double l) {
    return {Kind::ThresholdU, l};
  }
};

struct AkmcsConfig {
  std::int64_t pool_size = 20000;
  double sd_stop = 1.0;      // UncertaintySd stops when max sd < sd_stop
  double u_stop = 2.0;       // ThresholdU stops when min U >= u_stop
  int cap_multiplier = 200;  // additions capped at cap_multiplier * d
  KrigingConfig fit;
};

struct AkmcsReport {
  std::optional<KrigingModel> model;
  bool converged = false;
  std::int64_t n_model_evals = 0;
  std::vector<std::int64_t> selection_history;  // pool indices, in order
  std::vector<double> stop_metric_history;      // max sd or min U per fit
  // CPU spent fitting and scoring, excluding evaluator and observer calls.
  double cpu_s = 0.0;
};

// UncertaintySd -> predictive sd per pool point; ThresholdU -> |mean - l|/sd
// with sd = 0 mapped to +infinity.
std::vector<double> score_pool(const KrigingModel& model,
                               const SampleMatrix& pool,
                               const LearningFunction& lf);

// Fits on a random initial pool subset of size max(12, d+2), then adds the
// best-scoring remaining pool point and refits until the stopping rule fires
// or the addition budget runs out. The observer (if any) runs after each fit
// with the current training size, outside the cpu_s clock.
AkmcsReport run_akmcs(const Evaluator& f, int d, const LearningFunction& lf,
                      Seed seed, const AkmcsConfig& config = {},
                      const LoopObserver<KrigingModel>& observer = {});

}  // namespace gsa
