#pragma once

// MAP classification of y = Phi x + n, n ~ N(0, sigma^2 I), where class c
// induces y ~ N(Phi mu_c, Phi Sigma_c Phi^T + sigma^2 I).

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gmmcc/linalg.hpp"
#include "gmmcc/measurement.hpp"
#include "gmmcc/source.hpp"

namespace gmmcc {

struct NoisyObservation {
  Vec y;
  double sigma2 = 1.0;
};

inline void require_positive_noise(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidInput("noise variance sigma^2 must be finite and > 0");
  }
}

/// Per-class Cholesky factors of Phi Sigma_c Phi^T + sigma^2 I, built once and
/// reused for every observation at this noise level. Read-only after
/// construction, so one instance may classify from several threads.
class MapClassifier {
 public:
  MapClassifier(const MeasurementKernel& k, const GmmSource& src, double sigma2) : sigma2_(sigma2) {
    require_positive_noise(sigma2);
    if (k.n() != src.dim()) throw InvalidInput("kernel width does not match source dimension");
    const Index m = k.m();
    for (std::size_t c = 0; c < src.num_classes(); ++c) {
      Term t;
      t.log_prior = src.prior(c) > 0.0 ? std::log(src.prior(c))
                                       : -std::numeric_limits<double>::infinity();
      t.projected_mean = k.phi * src.mean(c);
      Mat cov = congruence(k.phi, src.covariance(c));
      cov.diagonal().array() += sigma2;
      t.chol.compute(cov);
      if (t.chol.info() != Eigen::Success) {
        throw InvalidInput("class covariance in measurement domain is not positive definite");
      }
      const Mat l = t.chol.matrixL();
      t.half_log_det = l.diagonal().array().log().sum();
      terms_.push_back(std::move(t));
    }
    m_ = m;
  }

  Index m() const { return m_; }
  std::size_t num_classes() const { return terms_.size(); }
  double sigma2() const { return sigma2_; }

  /// log P_c - 1/2 log det C_c - 1/2 (y - Phi mu_c)^T C_c^{-1} (y - Phi mu_c).
  /// The shared -M/2 log(2 pi) term is omitted.
  Vec log_posteriors(const Vec& y) const {
    if (y.size() != m_) throw InvalidInput("observation length does not match kernel rows");
    Vec out(static_cast<Index>(terms_.size()));
    for (std::size_t c = 0; c < terms_.size(); ++c) {
      const Term& t = terms_[c];
      const Vec r = y - t.projected_mean;
      const Vec w = t.chol.matrixL().solve(r);
      out(static_cast<Index>(c)) = t.log_prior - t.half_log_det - 0.5 * w.squaredNorm();
    }
    return out;
  }

  /// Argmax of the log-posteriors; ties resolve to the lowest index.
  std::size_t classify(const Vec& y) const { return argmax(log_posteriors(y)); }

  static std::size_t argmax(const Vec& scores) {
    std::size_t best = 0;
    for (Index c = 1; c < scores.size(); ++c) {
      if (scores(c) > scores(static_cast<Index>(best))) best = static_cast<std::size_t>(c);
    }
    return best;
  }

 private:
  struct Term {
    double log_prior = 0.0;
    Vec projected_mean;
    Eigen::LLT<Mat> chol;
    double half_log_det = 0.0;
  };

  std::vector<Term> terms_;
  Index m_ = 0;
  double sigma2_;
};

inline Vec log_posteriors(const NoisyObservation& obs, const MeasurementKernel& k,
                          const GmmSource& src) {
  return MapClassifier(k, src, obs.sigma2).log_posteriors(obs.y);
}

inline std::size_t classify(const NoisyObservation& obs, const MeasurementKernel& k,
                            const GmmSource& src) {
  return MapClassifier(k, src, obs.sigma2).classify(obs.y);
}

}  // namespace gmmcc
