#include "gsa/akmcs.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "gsa/cpu_timer.hpp"
#include "gsa/errors.hpp"

namespace gsa {

std::vector<double> score_pool(const KrigingModel& model,
                               const SampleMatrix& pool,
                               const LearningFunction& lf) {
  if (pool.n() == 0) throw std::invalid_argument("empty pool");
  Eigen::VectorXd mean, sd;
  const bool need_mean = lf.kind == LearningFunction::Kind::ThresholdU;
  model.predict_block(pool.points, need_mean ? &mean : nullptr, &sd);

  std::vector<double> scores(pool.n());
  if (lf.kind == LearningFunction::Kind::UncertaintySd) {
    for (std::int64_t i = 0; i < pool.n(); ++i) scores[i] = sd[i];
  } else {
    for (std::int64_t i = 0; i < pool.n(); ++i) {
      const double num = std::abs(mean[i] - lf.threshold_l);
      scores[i] = sd[i] > 0.0 ? num / sd[i]
                              : std::numeric_limits<double>::infinity();
    }
  }
  return scores;
}

AkmcsReport run_akmcs(const Evaluator& f, int d, const LearningFunction& lf,
                      Seed seed, const AkmcsConfig& config,
                      const LoopObserver<KrigingModel>& observer) {
  if (d < 1) throw InvalidDimension("need at least one dimension");
  if (lf.kind == LearningFunction::Kind::ThresholdU &&
      !std::isfinite(lf.threshold_l))
    throw std::invalid_argument("ThresholdU needs a finite threshold");

  const CpuStopwatch total;
  double excluded = 0.0;  // evaluator + observer CPU
  const SampleMatrix pool =
      latin_hypercube(config.pool_size, d, derive_seed(seed, 0x616b6du));
  const std::int64_t pool_n = pool.n();

  const std::int64_t initial =
      std::max<std::int64_t>(12, static_cast<std::int64_t>(d) + 2);
  if (initial > pool_n) throw std::invalid_argument("pool smaller than initial subset");

  std::vector<std::int64_t> order(pool_n);
  for (std::int64_t i = 0; i < pool_n; ++i) order[i] = i;
  RandomSource rng(derive_seed(seed, 0x696e6974u));
  rng.shuffle(order);

  AkmcsReport report;
  std::vector<char> evaluated(pool_n, 0);
  Eigen::MatrixXd x(initial, d);
  Eigen::VectorXd y(initial);
  std::vector<double> buf(d);
  for (std::int64_t j = 0; j < initial; ++j) {
    const std::int64_t idx = order[j];
    report.selection_history.push_back(idx);
    evaluated[idx] = 1;
    for (int c = 0; c < d; ++c) buf[c] = pool.points(idx, c);
    x.row(j) = pool.points.row(idx);
    const CpuStopwatch w;
    y[j] = f(buf);
    excluded += w.elapsed();
  }
  report.n_model_evals = initial;

  const std::int64_t max_additions =
      static_cast<std::int64_t>(config.cap_multiplier) * d;
  std::int64_t additions = 0;

  std::vector<std::int64_t> remaining;
  remaining.reserve(pool_n);
  Eigen::MatrixXd rem_points;
  const bool minimize = lf.kind == LearningFunction::Kind::ThresholdU;

  for (int iteration = 0;; ++iteration) {
    SampleMatrix train{x};
    const std::vector<double> yv(y.data(), y.data() + y.size());
    KrigingModel model = fit_kriging(
        train, yv, derive_seed(seed, 0x666974u + iteration), config.fit);
    if (observer) {
      const CpuStopwatch w;
      observer(model, x.rows());
      excluded += w.elapsed();
    }

    remaining.clear();
    for (std::int64_t i = 0; i < pool_n; ++i)
      if (!evaluated[i]) remaining.push_back(i);
    if (remaining.empty()) {
      report.model = std::move(model);
      break;  // pool exhausted without convergence
    }

    rem_points.resize(remaining.size(), d);
    for (std::size_t r = 0; r < remaining.size(); ++r)
      rem_points.row(r) = pool.points.row(remaining[r]);
    const std::vector<double> scores =
        score_pool(model, SampleMatrix{rem_points}, lf);

    // Best score and tie-broken (lowest pool index) winner in one scan;
    // remaining[] is ascending, so the first strict improvement wins.
    std::size_t best = 0;
    for (std::size_t r = 1; r < scores.size(); ++r) {
      if (minimize ? scores[r] < scores[best] : scores[r] > scores[best])
        best = r;
    }
    const double metric = scores[best];
    report.stop_metric_history.push_back(metric);

    const bool stop = minimize ? metric >= config.u_stop
                               : metric < config.sd_stop;
    if (stop) {
      report.model = std::move(model);
      report.converged = true;
      break;
    }
    if (additions >= max_additions) {
      report.model = std::move(model);
      break;  // unconverged: addition budget exhausted
    }

    const std::int64_t idx = remaining[best];
    report.selection_history.push_back(idx);
    evaluated[idx] = 1;
    for (int c = 0; c < d; ++c) buf[c] = pool.points(idx, c);
    x.conservativeResize(x.rows() + 1, Eigen::NoChange);
    x.row(x.rows() - 1) = pool.points.row(idx);
    y.conservativeResize(y.size() + 1);
    {
      const CpuStopwatch w;
      y[y.size() - 1] = f(buf);
      excluded += w.elapsed();
    }
    ++report.n_model_evals;
    ++additions;
  }
  report.cpu_s = total.elapsed() - excluded;
  return report;
}

}  // namespace gsa
