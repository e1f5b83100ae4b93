#include "gsa/bass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "gsa/cpu_timer.hpp"
#include "gsa/errors.hpp"

namespace gsa {
namespace {

constexpr double kTinyColumnNorm2 = 1e-12;  // per point, vs column variance

// Raw (uncentered) basis column over the training inputs.
Eigen::VectorXd basis_column(const BasisFunction& basis,
                             const Eigen::MatrixXd& x) {
  Eigen::VectorXd col = Eigen::VectorXd::Ones(x.rows());
  for (const HingeFactor& f : basis.factors) {
    col.array() *=
        (f.sign * (x.col(f.variable).array() - f.knot)).max(0.0);
  }
  return col;
}

BasisFunction propose_basis(RandomSource& rng, std::vector<int>& scratch,
                            int d, int max_degree) {
  const int jmax = std::min(max_degree, d);
  const int degree = 1 + static_cast<int>(rng.below(jmax));
  for (int i = 0; i < d; ++i) scratch[i] = i;
  BasisFunction basis;
  basis.factors.resize(degree);
  for (int i = 0; i < degree; ++i) {
    const int j = i + static_cast<int>(rng.below(d - i));
    std::swap(scratch[i], scratch[j]);
    basis.factors[i].variable = scratch[i];
    basis.factors[i].sign = rng.below(2) == 0 ? 1 : -1;
    basis.factors[i].knot = rng.uniform();
  }
  std::sort(basis.factors.begin(), basis.factors.end(),
            [](const HingeFactor& a, const HingeFactor& b) {
              return a.variable < b.variable;
            });
  return basis;
}

// Marginal-likelihood state of the current model (M bases).
struct ChainState {
  std::vector<BasisFunction> bases;
  Eigen::MatrixXd b_centered;  // n x M
  Eigen::VectorXd col_means;   // M
  Eigen::MatrixXd gram;        // M x M, b_centered^T b_centered
  Eigen::MatrixXd gram_chol;   // lower factor of gram
  Eigen::VectorXd v;           // b_centered^T y_centered
  double ssr = 0.0;            // v^T gram^-1 v
  double log_ml = 0.0;

  int m() const { return static_cast<int>(bases.size()); }
};

struct CandidateFit {
  Eigen::MatrixXd chol;
  double ssr = 0.0;
};

// Cholesky + quadratic form; empty result marks a singular proposal.
std::optional<CandidateFit> factor_gram(const Eigen::MatrixXd& gram,
                                        const Eigen::VectorXd& v) {
  CandidateFit fit;
  fit.chol = gram;
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(fit.chol);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd z =
      fit.chol.triangularView<Eigen::Lower>().solve(v);
  fit.ssr = z.squaredNorm();
  return fit;
}

}  // namespace

BassPosterior fit_bass(const SampleMatrix& x, std::span<const double> y,
                       const McmcConfig& mcmc, const BassPrior& prior,
                       Seed seed) {
  const std::int64_t n = x.n();
  const int d = x.k();
  if (d < 1) throw InvalidDimension("need at least one input dimension");
  if (n < 2) throw TooFewPoints("need at least two training points");
  if (static_cast<std::int64_t>(y.size()) != n)
    throw std::invalid_argument("output count does not match input rows");
  if ((x.points.array() < 0.0).any() || (x.points.array() > 1.0).any())
    throw DomainError("training inputs must lie in the unit cube");
  if (mcmc.chain_length < 1 || mcmc.burn_in < 0 ||
      mcmc.burn_in > mcmc.chain_length || mcmc.thin < 1)
    throw std::invalid_argument("invalid MCMC configuration");

  const Eigen::VectorXd yv =
      Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  const double y_mean = yv.mean();
  const Eigen::VectorXd y_c = yv.array() - y_mean;
  const double s_yy = y_c.squaredNorm();
  const double s_floor = s_yy > 0.0 ? s_yy * 1e-14 : 1e-300;

  const bool learn_tau = prior.g <= 0.0;
  // tau = 1/g starts at its prior mean 1/n (unit-information g = n)
  double tau = learn_tau ? 1.0 / static_cast<double>(n) : 1.0 / prior.g;
  const double tau_rate0 = prior.tau_shape * static_cast<double>(n);
  double g = 1.0 / tau;
  double shrink = 1.0 / (1.0 + tau);  // g/(1+g), stable for huge g
  const double half_df = 0.5 * static_cast<double>(n - 1);

  const auto log_marginal = [&](int m_count, double ssr) {
    const double s = std::max(s_yy - shrink * ssr, s_floor);
    return -0.5 * m_count * std::log1p(g) - half_df * std::log(s);
  };

  RandomSource rng(seed);
  std::vector<int> scratch(d);

  ChainState state;
  state.log_ml = log_marginal(0, 0.0);
  double lambda = 1.0;

  BassPosterior posterior;
  posterior.mcmc = mcmc;
  posterior.dimension = d;
  posterior.samples.reserve(
      static_cast<std::size_t>(std::max<std::int64_t>(mcmc.expected_samples(), 0)));

  const double col_floor = kTinyColumnNorm2 * static_cast<double>(n);
  const std::int64_t support_needed = std::min<std::int64_t>(
      prior.min_support,
      static_cast<std::int64_t>(std::ceil(0.1 * static_cast<double>(n))));
  const auto well_supported = [&](const Eigen::VectorXd& raw) {
    return (raw.array() > 0.0).count() >= support_needed;
  };

  for (std::int64_t t = 1; t <= mcmc.chain_length; ++t) {
    const int move = static_cast<int>(rng.below(3));
    const int m_cur = state.m();

    if (move == 0 && m_cur < prior.max_bases) {  // birth
      const BasisFunction cand = propose_basis(rng, scratch, d, prior.max_degree);
      const Eigen::VectorXd raw = basis_column(cand, x.points);
      const double mean = raw.mean();
      Eigen::VectorXd centered = raw.array() - mean;
      const double norm2 = centered.squaredNorm();
      if (norm2 > col_floor && well_supported(raw)) {
        Eigen::MatrixXd gram_new(m_cur + 1, m_cur + 1);
        gram_new.topLeftCorner(m_cur, m_cur) = state.gram;
        if (m_cur > 0) {
          const Eigen::VectorXd w =
              state.b_centered.transpose() * centered;
          gram_new.topRightCorner(m_cur, 1) = w;
          gram_new.bottomLeftCorner(1, m_cur) = w.transpose();
        }
        gram_new(m_cur, m_cur) = norm2;
        Eigen::VectorXd v_new(m_cur + 1);
        v_new.head(m_cur) = state.v;
        v_new[m_cur] = centered.dot(y_c);

        if (const auto fit = factor_gram(gram_new, v_new)) {
          const double log_ml_new = log_marginal(m_cur + 1, fit->ssr);
          const double log_accept = log_ml_new - state.log_ml +
                                    std::log(lambda) -
                                    std::log(static_cast<double>(m_cur + 1));
          if (std::log(std::max(rng.uniform(), 1e-300)) < log_accept) {
            state.bases.push_back(cand);
            state.b_centered.conservativeResize(n, m_cur + 1);
            state.b_centered.col(m_cur) = centered;
            state.col_means.conservativeResize(m_cur + 1);
            state.col_means[m_cur] = mean;
            state.gram = std::move(gram_new);
            state.gram_chol = fit->chol;
            state.v = std::move(v_new);
            state.ssr = fit->ssr;
            state.log_ml = log_ml_new;
          }
        }
      }
    } else if (move == 1 && m_cur > 0) {  // death
      const int victim = static_cast<int>(rng.below(m_cur));
      Eigen::MatrixXd gram_new(m_cur - 1, m_cur - 1);
      Eigen::VectorXd v_new(m_cur - 1);
      for (int i = 0, ii = 0; i < m_cur; ++i) {
        if (i == victim) continue;
        v_new[ii] = state.v[i];
        for (int j = 0, jj = 0; j < m_cur; ++j) {
          if (j == victim) continue;
          gram_new(ii, jj) = state.gram(i, j);
          ++jj;
        }
        ++ii;
      }
      const auto fit = m_cur == 1
                           ? std::optional<CandidateFit>(CandidateFit{})
                           : factor_gram(gram_new, v_new);
      if (fit) {
        const double log_ml_new = log_marginal(m_cur - 1, fit->ssr);
        const double log_accept = log_ml_new - state.log_ml +
                                  std::log(static_cast<double>(m_cur)) -
                                  std::log(lambda);
        if (std::log(std::max(rng.uniform(), 1e-300)) < log_accept) {
          state.bases.erase(state.bases.begin() + victim);
          // shift columns left over the victim
          for (int c = victim; c + 1 < m_cur; ++c) {
            state.b_centered.col(c) = state.b_centered.col(c + 1);
            state.col_means[c] = state.col_means[c + 1];
          }
          state.b_centered.conservativeResize(n, m_cur - 1);
          state.col_means.conservativeResize(m_cur - 1);
          state.gram = std::move(gram_new);
          state.gram_chol = fit->chol;
          state.v = std::move(v_new);
          state.ssr = fit->ssr;
          state.log_ml = log_ml_new;
        }
      }
    } else if (move == 2 && m_cur > 0) {  // change: redraw one basis
      const int victim = static_cast<int>(rng.below(m_cur));
      const BasisFunction cand = propose_basis(rng, scratch, d, prior.max_degree);
      const Eigen::VectorXd raw = basis_column(cand, x.points);
      const double mean = raw.mean();
      Eigen::VectorXd centered = raw.array() - mean;
      const double norm2 = centered.squaredNorm();
      if (norm2 > col_floor && well_supported(raw)) {
        Eigen::VectorXd w = state.b_centered.transpose() * centered;
        Eigen::MatrixXd gram_new = state.gram;
        gram_new.col(victim) = w;
        gram_new.row(victim) = w.transpose();
        gram_new(victim, victim) = norm2;
        Eigen::VectorXd v_new = state.v;
        v_new[victim] = centered.dot(y_c);

        if (const auto fit = factor_gram(gram_new, v_new)) {
          const double log_ml_new = log_marginal(m_cur, fit->ssr);
          if (std::log(std::max(rng.uniform(), 1e-300)) <
              log_ml_new - state.log_ml) {
            state.bases[victim] = cand;
            state.b_centered.col(victim) = centered;
            state.col_means[victim] = mean;
            state.gram = std::move(gram_new);
            state.gram_chol = fit->chol;
            state.v = std::move(v_new);
            state.ssr = fit->ssr;
            state.log_ml = log_ml_new;
          }
        }
      }
    }

    const int m_now = state.m();
    lambda = rng.gamma(prior.lambda_shape + m_now, prior.lambda_rate + 1.0);

    // Draw (sigma2, beta) every sweep: the precision update needs them, and
    // thinned records reuse the same draws.
    const double s_model = std::max(s_yy - shrink * state.ssr, 0.0);
    const double gamma_draw = rng.gamma(half_df, 1.0);
    const double sigma2 = std::max(0.5 * s_model / gamma_draw,
                                   std::numeric_limits<double>::min());
    double alpha = y_mean + rng.normal() * std::sqrt(sigma2 / n);
    Eigen::VectorXd beta(m_now);
    double quad = 0.0;  // beta' B'B beta, rate term of the tau update
    if (m_now > 0) {
      // L' beta = shrink * L^{-1} v + sqrt(shrink sigma2) * z. Substitution
      // spelled out instead of Eigen's solver: the vectorized kernels choose
      // their reduction split at run time, and these draws must replay
      // bitwise for a fixed seed. The systems stay tiny (m bases).
      Eigen::VectorXd lt_beta(m_now);
      for (int i = 0; i < m_now; ++i) {
        double s = state.v[i];
        for (int j = 0; j < i; ++j) s -= state.gram_chol(i, j) * lt_beta[j];
        lt_beta[i] = s / state.gram_chol(i, i);
      }
      const double noise_sd = std::sqrt(shrink * sigma2);
      for (int i = 0; i < m_now; ++i) {
        lt_beta[i] = shrink * lt_beta[i] + noise_sd * rng.normal();
        quad += lt_beta[i] * lt_beta[i];
      }
      for (int i = m_now - 1; i >= 0; --i) {
        double s = lt_beta[i];
        for (int j = i + 1; j < m_now; ++j)
          s -= state.gram_chol(j, i) * beta[j];
        beta[i] = s / state.gram_chol(i, i);
      }
    }
    if (learn_tau) {
      tau = rng.gamma(prior.tau_shape + 0.5 * m_now,
                      tau_rate0 + 0.5 * quad / sigma2);
      tau = std::max(tau, 1e-300);
      g = 1.0 / tau;
      shrink = 1.0 / (1.0 + tau);
      state.log_ml = log_marginal(m_now, state.ssr);
    }

    if (t > mcmc.burn_in && (t - mcmc.burn_in) % mcmc.thin == 0) {
      BassSample sample;
      sample.bases = state.bases;
      sample.noise_variance = sigma2;
      sample.coefficients.resize(m_now);
      for (int i = 0; i < m_now; ++i) {
        sample.coefficients[i] = beta[i];
        alpha -= beta[i] * state.col_means[i];
      }
      sample.intercept = alpha;
      posterior.samples.push_back(std::move(sample));
    }
  }
  return posterior;
}

namespace {

Eigen::VectorXd sample_values_block(const BassSample& sample,
                                    const Eigen::MatrixXd& points,
                                    Eigen::VectorXd& scratch) {
  Eigen::VectorXd out =
      Eigen::VectorXd::Constant(points.rows(), sample.intercept);
  for (std::size_t m = 0; m < sample.bases.size(); ++m) {
    scratch.setOnes(points.rows());
    for (const HingeFactor& f : sample.bases[m].factors) {
      scratch.array() *=
          (f.sign * (points.col(f.variable).array() - f.knot)).max(0.0);
    }
    out += sample.coefficients[m] * scratch;
  }
  return out;
}

}  // namespace

void bass_predict_block(const BassPosterior& posterior,
                        const Eigen::MatrixXd& points, Eigen::VectorXd* mean,
                        Eigen::VectorXd* sd) {
  if (posterior.samples.empty())
    throw std::invalid_argument("empty posterior");
  if (points.cols() != posterior.dimension)
    throw InvalidDimension("prediction points have the wrong dimension");
  if ((points.array() < 0.0).any() || (points.array() > 1.0).any())
    throw DomainError("prediction points must lie in the unit cube");

  const std::int64_t p = points.rows();
  Eigen::VectorXd running_mean = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scratch(p);
  std::int64_t count = 0;
  for (const BassSample& sample : posterior.samples) {
    const Eigen::VectorXd vals =
        sample_values_block(sample, points, scratch);
    ++count;
    const Eigen::VectorXd delta = vals - running_mean;
    running_mean += delta / static_cast<double>(count);
    m2.array() += delta.array() * (vals - running_mean).array();
  }
  if (mean) *mean = running_mean;
  if (sd) {
    if (count < 2)
      *sd = Eigen::VectorXd::Zero(p);
    else
      *sd = (m2 / static_cast<double>(count - 1)).cwiseSqrt();
  }
}

BassPrediction bass_predict(const BassPosterior& posterior,
                            std::span<const double> x) {
  Eigen::MatrixXd pt(1, static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) pt(0, static_cast<int>(i)) = x[i];
  Eigen::VectorXd mean, sd;
  bass_predict_block(posterior, pt, &mean, &sd);
  return {mean[0], sd[0]};
}

EmulationLoopReport<BassPosterior> bass_emulation_loop(
    const Evaluator& f, int d, Seed seed, const McmcConfig& mcmc,
    const BassPrior& prior, const EmulationLoopConfig& loop_config,
    const LoopObserver<BassPosterior>& observer) {
  if (d < 1) throw InvalidDimension("loop needs at least one dimension");
  const CpuStopwatch total;
  double excluded = 0.0;  // evaluator + observer CPU
  const SampleMatrix pool =
      latin_hypercube(loop_config.pool_size, d, derive_seed(seed, 0x706f6fu));

  EmulationLoopReport<BassPosterior> report;
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

    BassPosterior posterior =
        fit_bass(x, y, mcmc, prior, derive_seed(seed, 0x666974u + round));
    Eigen::VectorXd sd;
    bass_predict_block(posterior, pool.points, nullptr, &sd);
    const double max_sd = sd.maxCoeff();

    report.sample_size_history.push_back(n);
    report.pool_max_sd_history.push_back(max_sd);
    report.final_sample_size = n;
    report.model = std::move(posterior);
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
