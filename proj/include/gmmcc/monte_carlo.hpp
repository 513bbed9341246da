#pragma once

// Seeded Monte Carlo estimates of the MAP misclassification probability,
// a Rao-Blackwellized two-class oracle, and SNR sweeps that pair each
// estimate with the union upper bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gmmcc/bounds.hpp"
#include "gmmcc/classifier.hpp"
#include "gmmcc/linalg.hpp"
#include "gmmcc/measurement.hpp"
#include "gmmcc/rng.hpp"
#include "gmmcc/source.hpp"

namespace gmmcc {

inline constexpr double kZ95 = 1.959963984540054;

struct ErrorEstimate {
  double p_err = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  /// Standard error of p_err (binomial for counts, sample-based for the oracle).
  double std_error = 0.0;
  std::uint64_t n_trials = 0;
  std::uint64_t n_errors = 0;
  std::uint64_t seed = 0;

  double half_width() const { return 0.5 * (ci_high - ci_low); }
};

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// 95% Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = kZ95) {
  if (n == 0) throw InvalidInput("wilson_interval: n must be >= 1");
  if (k > n) throw InvalidInput("wilson_interval: k exceeds n");
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(k) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double centre = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  Interval ci;
  ci.low = k == 0 ? 0.0 : std::clamp(centre - half, 0.0, p);
  ci.high = k == n ? 1.0 : std::clamp(centre + half, p, 1.0);
  return ci;
}

inline ErrorEstimate estimate_from_counts(std::uint64_t errors, std::uint64_t trials,
                                          std::uint64_t seed) {
  ErrorEstimate e;
  e.n_trials = trials;
  e.n_errors = errors;
  e.seed = seed;
  e.p_err = static_cast<double>(errors) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.p_err * (1.0 - e.p_err) / static_cast<double>(trials));
  const Interval ci = wilson_interval(errors, trials);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

/// Draws (label, x), observes y = Phi x + sigma z, classifies, counts errors.
inline ErrorEstimate estimate_perr(const GmmSource& src, const MeasurementKernel& k,
                                   double sigma2, std::uint64_t n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw InvalidInput("n_trials must be >= 1");
  const MapClassifier map(k, src, sigma2);
  const SourceSampler sampler(src);
  const double sigma = std::sqrt(sigma2);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec y(k.m());
  std::uint64_t errors = 0;
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const LabeledSample s = sampler(rng);
    y.noalias() = k.phi * s.x;
    for (Index r = 0; r < y.size(); ++r) y(r) += sigma * normal(rng);
    if (map.classify(y) != s.label) ++errors;
  }
  return estimate_from_counts(errors, n_trials, seed);
}

/// Estimates P_err = integral of min(P1 p1(y), P2 p2(y)) dy by drawing y from
/// the mixture and averaging min / sum of the weighted likelihoods, which
/// equals 1 / (1 + exp|log-ratio|). The interval is a normal approximation.
inline ErrorEstimate oracle_perr_two_class(const GmmSource& src, const MeasurementKernel& k,
                                           double sigma2, std::uint64_t n_samples,
                                           std::uint64_t seed) {
  if (src.num_classes() != 2) throw InvalidInput("the oracle needs exactly two classes");
  if (n_samples < 1) throw InvalidInput("n_samples must be >= 1");
  const MapClassifier map(k, src, sigma2);
  const SourceSampler sampler(src);
  const double sigma = std::sqrt(sigma2);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec y(k.m());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t t = 0; t < n_samples; ++t) {
    const LabeledSample s = sampler(rng);
    y.noalias() = k.phi * s.x;
    for (Index r = 0; r < y.size(); ++r) y(r) += sigma * normal(rng);
    const Vec lp = map.log_posteriors(y);
    const double gap = std::abs(lp(0) - lp(1));
    // A zero-prior class gives an infinite gap and a zero term.
    const double v = std::isfinite(gap) ? 1.0 / (1.0 + std::exp(gap)) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  ErrorEstimate e;
  e.n_trials = n_samples;
  e.seed = seed;
  e.p_err = sum / n;
  const double var = n > 1.0 ? std::max(0.0, (sum_sq - n * e.p_err * e.p_err) / (n - 1.0)) : 0.0;
  e.std_error = std::sqrt(var / n);
  e.ci_low = std::max(0.0, e.p_err - kZ95 * e.std_error);
  e.ci_high = std::min(1.0, e.p_err + kZ95 * e.std_error);
  return e;
}

/// 1/sigma^2 in dB.
inline double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }
inline double snr_db_from_sigma2(double sigma2) { return -10.0 * std::log10(sigma2); }

struct SweepRecord {
  double snr_db = 0.0;
  double sigma2 = 0.0;
  ErrorEstimate estimate;
  double union_bound = 0.0;
};

struct SweepResult {
  std::string scenario;
  std::string kernel;  // short label for CSV ("random", "designed", ...)
  std::string kernel_provenance;
  Index m = 0;
  std::uint64_t seed = 0;
  std::vector<SweepRecord> records;
};

/// One estimate_perr and one union bound per grid point. Point p uses seed
/// derive_seed(seed, p), so the result does not depend on `threads`.
inline SweepResult snr_sweep(const GmmSource& src, const MeasurementKernel& k,
                             const std::vector<double>& snr_grid_db,
                             std::uint64_t trials_per_point, std::uint64_t seed,
                             std::string scenario = "", unsigned threads = 1) {
  if (snr_grid_db.empty()) throw InvalidInput("SNR grid is empty");
  if (trials_per_point < 1) throw InvalidInput("trials per point must be >= 1");
  for (std::size_t p = 0; p < snr_grid_db.size(); ++p) {
    if (!std::isfinite(snr_grid_db[p])) throw InvalidInput("SNR grid has non-finite values");
    require_positive_noise(sigma2_from_snr_db(snr_grid_db[p]));
    if (p > 0 && !(snr_grid_db[p] > snr_grid_db[p - 1])) {
      throw InvalidInput("SNR grid must be strictly increasing");
    }
  }
  SweepResult out;
  out.scenario = std::move(scenario);
  out.kernel = k.kind();
  out.kernel_provenance = k.describe();
  out.m = k.m();
  out.seed = seed;
  out.records.resize(snr_grid_db.size());

  const UnionBound ub(k, src);
  auto run_point = [&](std::size_t p) {
    SweepRecord& r = out.records[p];
    r.snr_db = snr_grid_db[p];
    r.sigma2 = sigma2_from_snr_db(r.snr_db);
    r.estimate = estimate_perr(src, k, r.sigma2, trials_per_point, derive_seed(seed, p));
    r.union_bound = ub(r.sigma2);
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(snr_grid_db.size())));
  if (threads == 1) {
    for (std::size_t p = 0; p < snr_grid_db.size(); ++p) run_point(p);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t p = t; p < snr_grid_db.size(); p += threads) run_point(p);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace gmmcc
