#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gsa/evaluator.hpp"
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

struct KrigingConfig {
  double power = 1.95;
  double nugget_start = 1e-8;
  double nugget_factor = 10.0;
  double nugget_cap = 1e-2;
  double log10_theta_min = -2.0;
  double log10_theta_max = 3.0;
  // Derivative-free refinement budgets (profile-likelihood evaluations).
  int refine_evals_per_start = 30;
  int refine_evals_best = 200;
};

struct KrigingPrediction {
  double mean = 0.0;
  double sd = 0.0;
};

// Constant-mean Gaussian process with power-exponential correlation
//   R_ab = exp(-sum_k theta_k |x_ak - x_bk|^power),
// factored as LL^T after adding nugget * I.
class KrigingModel {
 public:
  KrigingPrediction predict(std::span<const double> x) const;

  // Mean without the sd triangular solve; O(n d) per point. Used when the
  // model stands in for the original evaluator during sensitivity analysis.
  double predict_mean(std::span<const double> x) const;

  // Batched prediction; both outputs are optional.
  void predict_block(const Eigen::MatrixXd& points, Eigen::VectorXd* mean,
                     Eigen::VectorXd* sd) const;

  int dimension() const { return static_cast<int>(x_.cols()); }
  std::int64_t n_training() const { return x_.rows(); }
  const Eigen::MatrixXd& training_inputs() const { return x_; }
  const Eigen::VectorXd& training_outputs() const { return y_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  double mu_hat() const { return mu_; }
  double sigma2_hat() const { return sigma2_; }
  double nugget() const { return nugget_; }
  double power() const { return power_; }
  double log_likelihood() const { return log_likelihood_; }

  // Builds a model with fixed hyperparameters (no search); nugget escalates
  // from nugget_start only if factorization fails at the given value.
  static KrigingModel with_theta(const SampleMatrix& x,
                                 std::span<const double> y,
                                 const Eigen::VectorXd& theta, double nugget,
                                 const KrigingConfig& config = {});

 private:
  friend KrigingModel fit_kriging(const SampleMatrix&, std::span<const double>,
                                  Seed, const KrigingConfig&);
  KrigingModel() = default;
  // Assembles a model from a successful factorization; derives the solve
  // caches used by predict.
  KrigingModel(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd theta,
               double power, double mu, double sigma2, double nugget,
               double log_likelihood, Eigen::MatrixXd chol);

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd theta_;
  double power_ = 1.95;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  double nugget_ = 0.0;
  double log_likelihood_ = 0.0;
  Eigen::MatrixXd chol_;     // lower-triangular factor of R + nugget I
  Eigen::VectorXd w_;        // R^-1 (y - mu 1)
  Eigen::VectorXd z_ones_;   // L^-1 1
  double ones_quad_ = 0.0;   // 1^T R^-1 1
};

// Maximizes the profile log-likelihood over log10(theta) in the configured
// box with 2d+1 Latin-hypercube starts and compass-search refinement.
KrigingModel fit_kriging(const SampleMatrix& x, std::span<const double> y,
                         Seed seed, const KrigingConfig& config = {});

struct EmulationLoopConfig {
  std::int64_t pool_size = 20000;
  double sd_threshold = 1.0;
  int start_multiplier = 10;  // initial n = start_multiplier * d
  int cap_multiplier = 200;   // stop growing past cap_multiplier * d
};

template <typename ModelT>
struct EmulationLoopReport {
  std::optional<ModelT> model;
  bool converged = false;
  std::int64_t n_model_evals = 0;
  std::int64_t final_sample_size = 0;
  std::vector<std::int64_t> sample_size_history;
  std::vector<double> pool_max_sd_history;
  // CPU spent fitting and scoring, excluding evaluator and observer calls
  // (evaluations are priced at nominal time by the cost ledger instead).
  double cpu_s = 0.0;
};

// Optional per-round hook; runs after each fit, outside the cpu_s clock, so
// callers can record diagnostics without distorting the ledger.
template <typename ModelT>
using LoopObserver = std::function<void(const ModelT&, std::int64_t)>;

// Non-adaptive loop: fit on fresh LHS samples of size 10d, 11d, ... until the
// posterior sd is below the threshold at every point of a fixed LHS pool.
EmulationLoopReport<KrigingModel> kriging_emulation_loop(
    const Evaluator& f, int d, Seed seed, const KrigingConfig& fit_config = {},
    const EmulationLoopConfig& loop_config = {},
    const LoopObserver<KrigingModel>& observer = {});

}  // namespace gsa
