#include "gsa/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gsa/cpu_timer.hpp"
#include "gsa/errors.hpp"

namespace gsa {
namespace {

constexpr double kSigma2Floor = 1e-300;
// Above this footprint the per-dimension pair powers are recomputed per
// likelihood evaluation instead of being cached.
constexpr std::int64_t kPackedBytesLimit = std::int64_t{1} << 30;

void check_unit_cube(const Eigen::MatrixXd& x) {
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any())
    throw DomainError("training inputs must lie in the unit cube");
}

struct ProfileResult {
  bool ok = false;
  double ll = -std::numeric_limits<double>::infinity();
  double mu = 0.0;
  double sigma2 = 0.0;
  double nugget = 0.0;
};

// Shared state for repeated profile-likelihood evaluations at one data set.
class ProfileEvaluator {
 public:
  ProfileEvaluator(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const KrigingConfig& cfg)
      : x_(x),
        y_(y),
        cfg_(cfg),
        n_(static_cast<int>(x.rows())),
        d_(static_cast<int>(x.cols())),
        npairs_(static_cast<std::int64_t>(n_) * (n_ - 1) / 2) {
    packed_ = npairs_ * d_ * 8 <= kPackedBytesLimit;
    if (packed_) {
      pair_pow_.resize(npairs_, d_);
      std::int64_t p = 0;
      for (int b = 0; b < n_; ++b) {
        const std::int64_t len = n_ - 1 - b;
        if (len <= 0) continue;
        for (int k = 0; k < d_; ++k) {
          pair_pow_.block(p, k, len, 1).array() =
              (x_.block(b + 1, k, len, 1).array() - x_(b, k))
                  .abs()
                  .pow(cfg_.power);
        }
        p += len;
      }
    }
    rm_.resize(n_, n_);
    rvec_.resize(npairs_);
  }

  // Correlation value per pair (column-major lower triangle order).
  void correlation_values(const Eigen::VectorXd& theta) {
    if (packed_) {
      rvec_.noalias() = pair_pow_ * theta;
    } else {
      std::int64_t p = 0;
      for (int b = 0; b < n_; ++b) {
        for (int a = b + 1; a < n_; ++a, ++p) {
          double acc = 0.0;
          for (int k = 0; k < d_; ++k)
            acc += theta[k] * std::pow(std::abs(x_(a, k) - x_(b, k)),
                                       cfg_.power);
          rvec_[p] = acc;
        }
      }
    }
    rvec_ = (-rvec_.array()).exp();
  }

  void fill_matrix(double nugget) {
    std::int64_t p = 0;
    for (int b = 0; b < n_; ++b) {
      rm_(b, b) = 1.0 + nugget;
      const std::int64_t len = n_ - 1 - b;
      if (len > 0) {
        rm_.block(b + 1, b, len, 1) = rvec_.segment(p, len);
        p += len;
      }
    }
  }

  // Profile likelihood with nugget escalation; optionally keeps the factor.
  ProfileResult evaluate(const Eigen::VectorXd& theta,
                         Eigen::MatrixXd* factor_out = nullptr,
                         double fixed_nugget = -1.0) {
    correlation_values(theta);
    ProfileResult res;
    double nugget =
        fixed_nugget >= 0.0 ? fixed_nugget : cfg_.nugget_start;
    for (;;) {
      fill_matrix(nugget);
      Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(rm_);
      if (llt.info() == Eigen::Success) {
        auto lower = rm_.triangularView<Eigen::Lower>();
        Eigen::VectorXd z1 = lower.solve(y_);
        Eigen::VectorXd z0 = lower.solve(Eigen::VectorXd::Ones(n_));
        const double s11 = z0.squaredNorm();
        const double mu = z0.dot(z1) / s11;
        const double sigma2 =
            std::max((z1 - mu * z0).squaredNorm() / n_, kSigma2Floor);
        double logdet = 0.0;
        for (int i = 0; i < n_; ++i) logdet += std::log(rm_(i, i));
        res.ok = true;
        res.mu = mu;
        res.sigma2 = sigma2;
        res.nugget = nugget;
        res.ll = -0.5 * n_ * std::log(sigma2) - logdet;
        if (factor_out) *factor_out = rm_;
        return res;
      }
      if (fixed_nugget >= 0.0) {
        // Caller pinned the nugget; fall back to the escalation ladder.
        fixed_nugget = -1.0;
        nugget = cfg_.nugget_start;
        continue;
      }
      if (nugget >= cfg_.nugget_cap) return res;
      nugget = std::min(nugget * cfg_.nugget_factor, cfg_.nugget_cap);
    }
  }

 private:
  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const KrigingConfig& cfg_;
  int n_;
  int d_;
  std::int64_t npairs_;
  bool packed_ = false;
  Eigen::MatrixXd pair_pow_;  // npairs x d
  Eigen::VectorXd rvec_;
  Eigen::MatrixXd rm_;
};

Eigen::VectorXd pow10(const Eigen::VectorXd& z) {
  return Eigen::pow(10.0, z.array());
}

// First-improvement compass search over log10(theta) within the box.
void compass_refine(ProfileEvaluator& pe, const KrigingConfig& cfg,
                    Eigen::VectorXd& z, double& ll, int budget,
                    double step0) {
  const int d = static_cast<int>(z.size());
  double step = step0;
  while (budget > 0 && step >= 1e-3) {
    bool improved = false;
    for (int i = 0; i < d && budget > 0; ++i) {
      for (double dir : {1.0, -1.0}) {
        if (budget <= 0) break;
        Eigen::VectorXd zc = z;
        zc[i] = std::clamp(zc[i] + dir * step, cfg.log10_theta_min,
                           cfg.log10_theta_max);
        if (zc[i] == z[i]) continue;
        --budget;
        const ProfileResult r = pe.evaluate(pow10(zc));
        if (r.ok && r.ll > ll) {
          z = zc;
          ll = r.ll;
          improved = true;
          break;  // move on to the next coordinate from the new point
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

KrigingPrediction KrigingModel::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension())
    throw InvalidDimension("predict: wrong point dimension");
  Eigen::MatrixXd p(1, dimension());
  for (int k = 0; k < dimension(); ++k) p(0, k) = x[k];
  Eigen::VectorXd mean(1), sd(1);
  predict_block(p, &mean, &sd);
  return {mean[0], sd[0]};
}

double KrigingModel::predict_mean(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension())
    throw InvalidDimension("predict_mean: wrong point dimension");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_training());
  for (int k = 0; k < dimension(); ++k) {
    if (x[k] < 0.0 || x[k] > 1.0)
      throw DomainError("prediction points must lie in the unit cube");
    acc.array() += theta_[k] * (x_.col(k).array() - x[k]).abs().pow(power_);
  }
  return mu_ + ((-acc.array()).exp() * w_.array()).sum();
}

void KrigingModel::predict_block(const Eigen::MatrixXd& points,
                                 Eigen::VectorXd* mean,
                                 Eigen::VectorXd* sd) const {
  if (points.cols() != dimension())
    throw InvalidDimension("predict_block: wrong point dimension");
  if ((points.array() < 0.0).any() || (points.array() > 1.0).any())
    throw DomainError("prediction points must lie in the unit cube");

  const std::int64_t q = points.rows();
  const std::int64_t n = n_training();
  if (mean) mean->resize(q);
  if (sd) sd->resize(q);

  constexpr std::int64_t kChunk = 512;
  Eigen::MatrixXd acc, tmp;
  for (std::int64_t at = 0; at < q; at += kChunk) {
    const std::int64_t m = std::min(kChunk, q - at);
    acc.setZero(n, m);
    for (int k = 0; k < dimension(); ++k) {
      tmp = x_.col(k).replicate(1, m);
      tmp.array().rowwise() -=
          points.col(k).segment(at, m).transpose().array();
      acc.array() += theta_[k] * tmp.array().abs().pow(power_);
    }
    acc = (-acc.array()).exp();  // cross-correlations, n x m

    if (mean)
      mean->segment(at, m) =
          (acc.transpose() * w_).array() + mu_;
    if (sd) {
      chol_.triangularView<Eigen::Lower>().solveInPlace(acc);
      for (std::int64_t j = 0; j < m; ++j) {
        const double quad = acc.col(j).squaredNorm();
        const double h = 1.0 - z_ones_.dot(acc.col(j));
        const double var =
            sigma2_ * (1.0 - quad + h * h / ones_quad_);
        (*sd)[at + j] = std::sqrt(std::max(var, 0.0));
      }
    }
  }
}

KrigingModel::KrigingModel(Eigen::MatrixXd x, Eigen::VectorXd y,
                           Eigen::VectorXd theta, double power, double mu,
                           double sigma2, double nugget, double log_likelihood,
                           Eigen::MatrixXd chol)
    : x_(std::move(x)),
      y_(std::move(y)),
      theta_(std::move(theta)),
      power_(power),
      mu_(mu),
      sigma2_(sigma2),
      nugget_(nugget),
      log_likelihood_(log_likelihood),
      chol_(std::move(chol)) {
  chol_.triangularView<Eigen::StrictlyUpper>().setZero();
  auto lower = chol_.triangularView<Eigen::Lower>();
  Eigen::VectorXd z1 = lower.solve(y_);
  z_ones_ = lower.solve(Eigen::VectorXd::Ones(y_.size()));
  ones_quad_ = z_ones_.squaredNorm();
  Eigen::VectorXd resid = z1 - mu_ * z_ones_;
  w_ = chol_.transpose().triangularView<Eigen::Upper>().solve(resid);
}

namespace {

void check_fit_inputs(const SampleMatrix& x, std::span<const double> y) {
  const std::int64_t n = x.n();
  const int d = x.k();
  if (d < 1) throw InvalidDimension("fit needs at least one input dimension");
  if (static_cast<std::int64_t>(y.size()) != n)
    throw std::invalid_argument("output count does not match input rows");
  if (n < d + 1)
    throw TooFewPoints("need at least d+1 training points, got " +
                       std::to_string(n));
  check_unit_cube(x.points);
}

}  // namespace

KrigingModel KrigingModel::with_theta(const SampleMatrix& x,
                                      std::span<const double> y,
                                      const Eigen::VectorXd& theta,
                                      double nugget,
                                      const KrigingConfig& config) {
  check_fit_inputs(x, y);
  if (theta.size() != x.k() || (theta.array() <= 0.0).any())
    throw std::invalid_argument("theta must be positive with one entry per dimension");
  Eigen::VectorXd yv =
      Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  ProfileEvaluator pe(x.points, yv, config);
  Eigen::MatrixXd factor;
  const ProfileResult res = pe.evaluate(theta, &factor, nugget);
  if (!res.ok)
    throw IllConditioned("correlation matrix not factorable at the nugget cap");
  return KrigingModel(x.points, yv, theta, config.power, res.mu, res.sigma2,
                      res.nugget, res.ll, std::move(factor));
}

KrigingModel fit_kriging(const SampleMatrix& x, std::span<const double> y,
                         Seed seed, const KrigingConfig& config) {
  check_fit_inputs(x, y);
  const int d = x.k();
  Eigen::VectorXd yv =
      Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  ProfileEvaluator pe(x.points, yv, config);

  const double lo = config.log10_theta_min;
  const double hi = config.log10_theta_max;
  const int n_starts = 2 * d + 1;
  const SampleMatrix starts =
      latin_hypercube(n_starts, d, derive_seed(seed, 0x6b7266u));

  Eigen::VectorXd best_z;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd z =
        (starts.points.row(s).transpose().array() * (hi - lo) + lo).matrix();
    ProfileResult r = pe.evaluate(pow10(z));
    double ll = r.ok ? r.ll : -std::numeric_limits<double>::infinity();
    compass_refine(pe, config, z, ll, config.refine_evals_per_start, 0.5);
    if (ll > best_ll) {
      best_ll = ll;
      best_z = z;
    }
  }
  if (!std::isfinite(best_ll))
    throw IllConditioned(
        "correlation matrix not factorable at the nugget cap for any theta");

  compass_refine(pe, config, best_z, best_ll, config.refine_evals_best, 0.25);

  // Hold the optimum to the +-0.1 local-optimality contract directly.
  for (int pass = 0; pass < 10; ++pass) {
    bool moved = false;
    for (int i = 0; i < d; ++i) {
      for (double dir : {1.0, -1.0}) {
        Eigen::VectorXd zc = best_z;
        zc[i] = std::clamp(zc[i] + dir * 0.1, lo, hi);
        if (zc[i] == best_z[i]) continue;
        const ProfileResult r = pe.evaluate(pow10(zc));
        if (r.ok && r.ll > best_ll + 1e-7) {
          best_z = zc;
          best_ll = r.ll;
          moved = true;
        }
      }
    }
    if (!moved) break;
  }

  const Eigen::VectorXd theta = pow10(best_z);
  Eigen::MatrixXd factor;
  const ProfileResult res = pe.evaluate(theta, &factor, -1.0);
  if (!res.ok)
    throw IllConditioned("correlation matrix not factorable at the nugget cap");
  return KrigingModel(x.points, yv, theta, config.power, res.mu, res.sigma2,
                      res.nugget, res.ll, std::move(factor));
}

EmulationLoopReport<KrigingModel> kriging_emulation_loop(
    const Evaluator& f, int d, Seed seed, const KrigingConfig& fit_config,
    const EmulationLoopConfig& loop_config,
    const LoopObserver<KrigingModel>& observer) {
  if (d < 1) throw InvalidDimension("loop needs at least one dimension");
  const CpuStopwatch total;
  double excluded = 0.0;  // evaluator + observer CPU, not ours to ledger
  const SampleMatrix pool =
      latin_hypercube(loop_config.pool_size, d, derive_seed(seed, 0x706f6fu));

  EmulationLoopReport<KrigingModel> report;
  std::vector<double> buf(d);
  const std::int64_t cap =
      static_cast<std::int64_t>(loop_config.cap_multiplier) * d;
  for (int round = 0;; ++round) {
    const std::int64_t n =
        static_cast<std::int64_t>(loop_config.start_multiplier + round) * d;
    if (n > cap) break;  // unconverged

    const SampleMatrix x =
        latin_hypercube(n, d, derive_seed(seed, 0x73616d70u + round));
    std::vector<double> y(n);
    {
      const CpuStopwatch w;
      for (std::int64_t j = 0; j < n; ++j) {
        for (int c = 0; c < d; ++c) buf[c] = x.points(j, c);
        y[j] = f(buf);
      }
      excluded += w.elapsed();
    }
    report.n_model_evals += n;

    KrigingModel model =
        fit_kriging(x, y, derive_seed(seed, 0x666974u + round), fit_config);
    Eigen::VectorXd sd;
    model.predict_block(pool.points, nullptr, &sd);
    const double max_sd = sd.maxCoeff();

    report.sample_size_history.push_back(n);
    report.pool_max_sd_history.push_back(max_sd);
    report.final_sample_size = n;
    report.model = std::move(model);
    if (observer) {
      const CpuStopwatch w;
      observer(*report.model, n);
      excluded += w.elapsed();
    }
    if (max_sd < loop_config.sd_threshold) {
      report.converged = true;
      break;
    }
  }
  report.cpu_s = total.elapsed() - excluded;
  return report;
}

}  // namespace gsa
