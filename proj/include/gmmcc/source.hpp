#pragma once

// L-class Gaussian mixture source with possibly rank-deficient covariances.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gmmcc/linalg.hpp"
#include "gmmcc/rng.hpp"

namespace gmmcc {

inline constexpr double kPriorSumTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

struct ClassModel {
  double prior = 0.0;
  Vec mean;
  Mat covariance;
};

/// Sigma = U diag(eigenvalues) U^T with U = random_orthogonal(n, rotation_seed),
/// or plain diag(eigenvalues) when no rotation seed is given.
inline Mat covariance_from_spectrum(std::span<const double> eigenvalues,
                                    std::optional<std::uint64_t> rotation_seed) {
  const auto n = static_cast<Index>(eigenvalues.size());
  if (n == 0) throw InvalidInput("eigenvalue list is empty");
  Vec lambda(n);
  for (Index k = 0; k < n; ++k) {
    lambda(k) = eigenvalues[static_cast<std::size_t>(k)];
    if (!std::isfinite(lambda(k)) || lambda(k) < 0.0) {
      throw InvalidInput("covariance eigenvalues must be finite and nonnegative");
    }
  }
  if (!rotation_seed) return lambda.asDiagonal();
  const Mat u = random_orthogonal(n, *rotation_seed);
  return symmetrized(u * lambda.asDiagonal() * u.transpose());
}

class GmmSource {
 public:
  explicit GmmSource(std::vector<ClassModel> classes) : classes_(std::move(classes)) {
    validate();
  }

  Index dim() const { return classes_.front().mean.size(); }
  std::size_t num_classes() const { return classes_.size(); }
  const ClassModel& operator[](std::size_t c) const { return classes_.at(c); }
  const std::vector<ClassModel>& classes() const { return classes_; }

  double prior(std::size_t c) const { return classes_.at(c).prior; }
  const Vec& mean(std::size_t c) const { return classes_.at(c).mean; }
  const Mat& covariance(std::size_t c) const { return classes_.at(c).covariance; }

  bool has_equal_means() const {
    for (std::size_t c = 1; c < classes_.size(); ++c) {
      if (classes_[c].mean != classes_[0].mean) return false;
    }
    return true;
  }

  void check_pair(std::size_t i, std::size_t j) const {
    if (i >= classes_.size() || j >= classes_.size()) {
      throw InvalidInput("class index out of range");
    }
    if (i == j) throw InvalidInput("class pair indices must differ");
  }

 private:
  void validate() const {
    if (classes_.size() < 2) throw InvalidInput("a source needs at least two classes");
    const Index n = classes_.front().mean.size();
    if (n < 1) throw InvalidInput("source dimension must be >= 1");
    double total = 0.0;
    for (const auto& c : classes_) {
      // A zero prior is allowed: it models a class that never occurs.
      if (!(c.prior >= 0.0 && c.prior <= 1.0)) throw InvalidInput("prior must lie in [0, 1]");
      if (c.mean.size() != n || c.covariance.rows() != n || c.covariance.cols() != n) {
        throw InvalidInput("class dimensions disagree");
      }
      if (!c.mean.allFinite()) throw InvalidInput("class mean has non-finite entries");
      const SymmetricSpectrum s = spectrum(c.covariance);
      const double lambda_max = std::max(s.eigenvalues.maxCoeff(), 0.0);
      if (s.eigenvalues.minCoeff() < -kPsdTol * std::max(lambda_max, 1.0)) {
        throw InvalidInput("covariance is not positive semidefinite");
      }
      total += c.prior;
    }
    if (std::abs(total - 1.0) > kPriorSumTol) throw InvalidInput("priors must sum to 1");
  }

  std::vector<ClassModel> classes_;
};

/// Source-domain ranks of a class pair and their non-overlapping dimension count.
struct PairGeometry {
  Index r_si = 0;
  Index r_sj = 0;
  Index r_sij = 0;
  Index no_dim = 0;

  friend bool operator==(const PairGeometry&, const PairGeometry&) = default;
};

inline PairGeometry pair_geometry(const GmmSource& src, std::size_t i, std::size_t j,
                                  double tol_rel = kDefaultRankTol) {
  src.check_pair(i, j);
  PairGeometry g;
  g.r_si = effective_rank(src.covariance(i), tol_rel);
  g.r_sj = effective_rank(src.covariance(j), tol_rel);
  g.r_sij = effective_rank(symmetrized(src.covariance(i) + src.covariance(j)), tol_rel);
  g.no_dim = 2 * g.r_sij - g.r_si - g.r_sj;
  return g;
}

struct LabeledSample {
  std::size_t label = 0;
  Vec x;
};

/// Draws class labels by inverse CDF over cumulative priors. The first class
/// whose cumulative prior exceeds u wins, so ties go to the lower index.
class LabelSampler {
 public:
  explicit LabelSampler(const GmmSource& src) {
    double acc = 0.0;
    for (std::size_t c = 0; c < src.num_classes(); ++c) {
      acc += src.prior(c);
      cumulative_.push_back(acc);
      if (src.prior(c) > 0.0) last_positive_ = c;
    }
  }

  std::size_t operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t c = 0; c < cumulative_.size(); ++c) {
      if (u < cumulative_[c]) return c;
    }
    return last_positive_;
  }

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

/// Reusable sampler: precomputes one PSD square-root factor per class.
class SourceSampler {
 public:
  explicit SourceSampler(const GmmSource& src) : src_(&src), labels_(src) {
    for (const auto& c : src.classes()) factors_.push_back(psd_sqrt_factor(c.covariance));
  }

  LabeledSample operator()(Rng& rng) const {
    LabeledSample s;
    s.label = labels_(rng);
    s.x = draw(s.label, rng);
    return s;
  }

  /// x = mu_c + F_c z with z ~ N(0, I_r).
  Vec draw(std::size_t c, Rng& rng) const {
    const Mat& f = factors_[c];
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(f.cols());
    for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
    return src_->mean(c) + f * z;
  }

 private:
  const GmmSource* src_;
  LabelSampler labels_;
  std::vector<Mat> factors_;
};

inline std::vector<LabeledSample> sample_labeled(const GmmSource& src, std::uint64_t rng_seed,
                                                 std::size_t n) {
  if (n < 1) throw InvalidInput("sample_labeled: n must be >= 1");
  Rng rng = make_rng(rng_seed);
  const SourceSampler sampler(src);
  std::vector<LabeledSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(sampler(rng));
  return out;
}

}  // namespace gmmcc
