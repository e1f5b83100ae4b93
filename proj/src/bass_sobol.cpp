#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "gsa/bass.hpp"
#include "gsa/errors.hpp"

namespace gsa {

double hinge_moment_c1(const HingeFactor& f) {
  if (f.sign >= 0) {
    const double r = 1.0 - f.knot;
    return 0.5 * r * r;
  }
  return 0.5 * f.knot * f.knot;
}

namespace {

// Antiderivative of (t - a)(t - b).
double quad_antideriv(double t, double a, double b) {
  return t * t * t / 3.0 - 0.5 * (a + b) * t * t + a * b * t;
}

}  // namespace

double hinge_cross_moment_e(const HingeFactor& f, const HingeFactor& g) {
  if (f.variable != g.variable)
    throw InvalidPair("cross moment requires a shared variable");
  if (f.sign >= 0 && g.sign >= 0) {
    const double lo = std::max(f.knot, g.knot);
    if (lo >= 1.0) return 0.0;
    return quad_antideriv(1.0, f.knot, g.knot) -
           quad_antideriv(lo, f.knot, g.knot);
  }
  if (f.sign < 0 && g.sign < 0) {
    const double hi = std::min(f.knot, g.knot);
    if (hi <= 0.0) return 0.0;
    return quad_antideriv(hi, f.knot, g.knot) -
           quad_antideriv(0.0, f.knot, g.knot);
  }
  // Mixed signs: support is (ascending knot, descending knot).
  const double lo = f.sign >= 0 ? f.knot : g.knot;
  const double hi = f.sign >= 0 ? g.knot : f.knot;
  if (hi <= lo) return 0.0;
  return -(quad_antideriv(hi, lo, hi) - quad_antideriv(lo, lo, hi));
}

namespace {

// Per-basis data reused across all pair computations of one sample.
struct BasisMoments {
  std::vector<HingeFactor> factors;  // sorted by variable
  std::vector<double> c1;            // aligned with factors
  double coeff = 0.0;
  double mean_contrib = 0.0;  // coeff * product of c1
};

struct SharedVar {
  int variable;
  double c1c1;   // c1_f * c1_g
  double cross;  // E[h_f h_g]
};

double quantile_sorted(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Closed-form Sobol' indices of one spline sample; false when the sample
// carries no variance.
bool sample_indices(const BassSample& sample, int d, bool second_order,
                    SobolIndices& out) {
  const std::size_t n_bases = sample.bases.size();
  std::vector<BasisMoments> ent(n_bases + 1);
  ent[0].coeff = sample.intercept;
  ent[0].mean_contrib = sample.intercept;
  for (std::size_t m = 0; m < n_bases; ++m) {
    BasisMoments& e = ent[m + 1];
    e.factors = sample.bases[m].factors;
    e.coeff = sample.coefficients[m];
    e.c1.resize(e.factors.size());
    double prod = e.coeff;
    for (std::size_t j = 0; j < e.factors.size(); ++j) {
      e.c1[j] = hinge_moment_c1(e.factors[j]);
      prod *= e.c1[j];
    }
    e.mean_contrib = prod;
  }

  double ef = 0.0;
  for (const BasisMoments& e : ent) ef += e.mean_contrib;

  double g_full = 0.0;
  std::vector<double> single_delta(d, 0.0);
  std::vector<double> minus_delta(d, 0.0);
  std::map<std::pair<int, int>, double> pair_delta;

  std::vector<SharedVar> shared;
  std::array<double, 8> p_mask{};
  for (std::size_t i = 0; i < ent.size(); ++i) {
    for (std::size_t j = i; j < ent.size(); ++j) {
      const BasisMoments& a = ent[i];
      const BasisMoments& b = ent[j];
      const double w = i == j ? 1.0 : 2.0;

      shared.clear();
      double base = a.coeff * b.coeff;
      std::size_t ia = 0, ib = 0;
      while (ia < a.factors.size() && ib < b.factors.size()) {
        const int va = a.factors[ia].variable;
        const int vb = b.factors[ib].variable;
        if (va == vb) {
          shared.push_back({va, a.c1[ia] * b.c1[ib],
                            hinge_cross_moment_e(a.factors[ia], b.factors[ib])});
          ++ia;
          ++ib;
        } else if (va < vb) {
          base *= a.c1[ia++];
        } else {
          base *= b.c1[ib++];
        }
      }
      for (; ia < a.factors.size(); ++ia) base *= a.c1[ia];
      for (; ib < b.factors.size(); ++ib) base *= b.c1[ib];

      const int ns = static_cast<int>(shared.size());
      const int n_masks = 1 << ns;
      for (int mask = 0; mask < n_masks; ++mask) {
        double p = base;
        for (int s = 0; s < ns; ++s)
          p *= (mask >> s) & 1 ? shared[s].cross : shared[s].c1c1;
        p_mask[mask] = p;
      }
      const double p_empty = p_mask[0];
      const double p_all = p_mask[n_masks - 1];
      g_full += w * p_all;
      for (int s = 0; s < ns; ++s) {
        single_delta[shared[s].variable] += w * (p_mask[1 << s] - p_empty);
        minus_delta[shared[s].variable] +=
            w * (p_mask[(n_masks - 1) & ~(1 << s)] - p_all);
      }
      if (second_order && ns > 0) {
        // Dimension pairs touching the shared set: both-shared pairs get the
        // two-bit mask, mixed pairs reduce to the single-bit one.
        for (int s = 0; s < ns; ++s) {
          for (int s2 = s + 1; s2 < ns; ++s2) {
            const auto key = std::minmax(shared[s].variable,
                                         shared[s2].variable);
            pair_delta[{key.first, key.second}] +=
                w * (p_mask[(1 << s) | (1 << s2)] - p_empty);
          }
          const double d_single = w * (p_mask[1 << s] - p_empty);
          for (int u = 0; u < d; ++u) {
            if (u == shared[s].variable) continue;
            bool u_shared = false;
            for (int s2 = 0; s2 < ns; ++s2)
              if (shared[s2].variable == u) u_shared = true;
            if (u_shared) continue;  // handled by the two-bit case
            const auto key = std::minmax(shared[s].variable, u);
            pair_delta[{key.first, key.second}] += d_single;
          }
        }
      }
    }
  }

  const double variance = g_full - ef * ef;
  const double scale = std::max({std::abs(g_full), ef * ef, 1e-300});
  if (variance <= scale * 1e-12) return false;

  out.first_order.resize(d);
  out.total_order.resize(d);
  out.second_order.clear();
  out.total_variance = variance;
  out.base_size = 0;
  for (int i = 0; i < d; ++i) {
    out.first_order[i] = single_delta[i] / variance;
    out.total_order[i] = -minus_delta[i] / variance;
  }
  if (second_order) {
    for (const auto& [key, delta] : pair_delta) {
      out.second_order[key] = delta / variance -
                              out.first_order[key.first] -
                              out.first_order[key.second];
    }
  }
  return true;
}

}  // namespace

BassSobolEnsemble bass_sobol(const BassPosterior& posterior, int d,
                             bool second_order) {
  if (posterior.samples.empty())
    throw std::invalid_argument("empty posterior");
  if (d < 1) throw InvalidDimension("need at least one dimension");

  BassSobolEnsemble out;
  for (const BassSample& sample : posterior.samples) {
    SobolIndices idx;
    if (sample_indices(sample, d, second_order, idx))
      out.per_sample.push_back(std::move(idx));
  }
  if (out.per_sample.empty())
    throw DegenerateVariance("every posterior sample is constant");

  const std::size_t ns = out.per_sample.size();
  out.mean.first_order.assign(d, 0.0);
  out.mean.total_order.assign(d, 0.0);
  out.mean.total_variance = 0.0;
  for (const SobolIndices& idx : out.per_sample) {
    for (int i = 0; i < d; ++i) {
      out.mean.first_order[i] += idx.first_order[i];
      out.mean.total_order[i] += idx.total_order[i];
    }
    out.mean.total_variance += idx.total_variance;
    for (const auto& [key, v] : idx.second_order)
      out.mean.second_order[key] += v;
  }
  for (int i = 0; i < d; ++i) {
    out.mean.first_order[i] /= static_cast<double>(ns);
    out.mean.total_order[i] /= static_cast<double>(ns);
  }
  out.mean.total_variance /= static_cast<double>(ns);
  for (auto& [key, v] : out.mean.second_order) v /= static_cast<double>(ns);

  out.first_lower.resize(d);
  out.first_upper.resize(d);
  out.total_lower.resize(d);
  out.total_upper.resize(d);
  std::vector<double> buf(ns);
  for (int i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < ns; ++s)
      buf[s] = out.per_sample[s].first_order[i];
    out.first_lower[i] = quantile_sorted(buf, 0.025);
    out.first_upper[i] = quantile_sorted(buf, 0.975);
    for (std::size_t s = 0; s < ns; ++s)
      buf[s] = out.per_sample[s].total_order[i];
    out.total_lower[i] = quantile_sorted(buf, 0.025);
    out.total_upper[i] = quantile_sorted(buf, 0.975);
  }
  return out;
}

}  // namespace gsa
