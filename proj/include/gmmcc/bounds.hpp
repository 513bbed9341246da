#pragma once

// Bhattacharyya and union upper bounds on the MAP misclassification
// probability, their low-noise asymptotics (error floor, diversity-order,
// measurement gain, exponential decay) and high-noise Taylor coefficients.
//
// All determinants are handled through eigenvalues. The bound is evaluated as
//   log1p(lambda / sigma^2) sums
// so the M log(sigma^2) terms cancel exactly and sigma^2 = 1e-12 or 1e+12 are
// both safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gmmcc/classifier.hpp"
#include "gmmcc/linalg.hpp"
#include "gmmcc/measurement.hpp"
#include "gmmcc/source.hpp"

namespace gmmcc {

/// Precomputed spectra for one class pair, so the exponent K_ij can be
/// evaluated cheaply across a noise grid.
class PairBound {
 public:
  PairBound(const MeasurementKernel& k, const GmmSource& src, std::size_t i, std::size_t j,
            double tol_rel = kDefaultRankTol) {
    src.check_pair(i, j);
    if (k.n() != src.dim()) throw InvalidInput("kernel width does not match source dimension");
    const auto si = spectrum(congruence(k.phi, src.covariance(i)), tol_rel);
    const auto sj = spectrum(congruence(k.phi, src.covariance(j)), tol_rel);
    const auto ss = spectrum(congruence(k.phi, src.covariance(i) + src.covariance(j)), tol_rel);
    lambda_i_ = si.clipped_eigenvalues();
    lambda_j_ = sj.clipped_eigenvalues();
    lambda_s_ = ss.clipped_eigenvalues();
    mean_coords_ = ss.eigenvectors.transpose() * (k.phi * (src.mean(i) - src.mean(j)));
    prior_i_ = src.prior(i);
    prior_j_ = src.prior(j);
  }

  /// K_ij = 1/8 m^T [(S + 2 s2 I)/2]^{-1} m
  ///      + 1/2 log det((S + 2 s2 I)/2) / sqrt(det(B_i + s2 I) det(B_j + s2 I)).
  double exponent(double sigma2) const {
    require_positive_noise(sigma2);
    double quad = 0.0;
    double logdet = 0.0;
    for (Index k = 0; k < lambda_s_.size(); ++k) {
      const double c = mean_coords_(k);
      quad += c * c / (lambda_s_(k) + 2.0 * sigma2);
      logdet += std::log1p(lambda_s_(k) / (2.0 * sigma2));
    }
    for (Index k = 0; k < lambda_i_.size(); ++k) logdet -= 0.5 * std::log1p(lambda_i_(k) / sigma2);
    for (Index k = 0; k < lambda_j_.size(); ++k) logdet -= 0.5 * std::log1p(lambda_j_(k) / sigma2);
    return std::max(0.0, 0.25 * quad + 0.5 * logdet);
  }

  double log_bound(double sigma2) const {
    return 0.5 * std::log(prior_i_ * prior_j_) - exponent(sigma2);
  }

  double bound(double sigma2) const { return std::exp(log_bound(sigma2)); }

 private:
  Vec lambda_i_;
  Vec lambda_j_;
  Vec lambda_s_;
  Vec mean_coords_;
  double prior_i_ = 0.0;
  double prior_j_ = 0.0;
};

inline double bhattacharyya_exponent(const MeasurementKernel& k, const GmmSource& src,
                                     std::size_t i, std::size_t j, double sigma2) {
  return PairBound(k, src, i, j).exponent(sigma2);
}

/// sqrt(P_i P_j) exp(-K_ij).
inline double pair_upper_bound(const MeasurementKernel& k, const GmmSource& src, std::size_t i,
                               std::size_t j, double sigma2) {
  return PairBound(k, src, i, j).bound(sigma2);
}

/// Sum over ordered pairs i != j of P_i exp(-K_ij). Not clamped to 1.
class UnionBound {
 public:
  UnionBound(const MeasurementKernel& k, const GmmSource& src, double tol_rel = kDefaultRankTol) {
    const std::size_t l = src.num_classes();
    for (std::size_t i = 0; i + 1 < l; ++i) {
      for (std::size_t j = i + 1; j < l; ++j) {
        pairs_.push_back({PairBound(k, src, i, j, tol_rel), src.prior(i), src.prior(j)});
      }
    }
  }

  double operator()(double sigma2) const { return std::exp(log_value(sigma2)); }

  /// Log of the union bound via log-sum-exp, usable where the bound underflows.
  double log_value(double sigma2) const {
    std::vector<double> terms;
    for (const auto& p : pairs_) {
      const double kij = p.bound.exponent(sigma2);
      if (p.prior_i > 0.0) terms.push_back(std::log(p.prior_i) - kij);
      if (p.prior_j > 0.0) terms.push_back(std::log(p.prior_j) - kij);
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    return top + std::log(acc);
  }

 private:
  struct Entry {
    PairBound bound;
    double prior_i;
    double prior_j;
  };
  std::vector<Entry> pairs_;
};

inline double union_upper_bound(const MeasurementKernel& k, const GmmSource& src, double sigma2) {
  return UnionBound(k, src)(sigma2);
}

enum class DecayKind { error_floor, polynomial_decay, exponential_decay };

inline const char* to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::error_floor:
      return "error_floor";
    case DecayKind::polynomial_decay:
      return "polynomial_decay";
    case DecayKind::exponential_decay:
      return "exponential_decay";
  }
  return "unknown";
}

/// Low-noise behaviour of an upper bound. Polynomial decay reads
///   P_ub ~ (a g_m / sigma^2)^(-d).
/// floor_value is set iff error_floor; d, g_m and a iff polynomial_decay,
/// except for kernel-free predictions, which leave the gain unset.
struct AsymptoticProfile {
  DecayKind kind = DecayKind::error_floor;
  std::optional<double> floor_value;
  std::optional<double> d;
  std::optional<double> g_m;
  std::optional<double> a;
  /// Pairs that attain the profile (the minimum-diversity set for unions).
  std::vector<ClassPair> governing_pairs;

  /// a * g_m, the gain that multiplies 1/sigma^2 for nonzero means.
  std::optional<double> effective_gain() const {
    if (!g_m) return std::nullopt;
    return *g_m * a.value_or(1.0);
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(10);
    os << gmmcc::to_string(kind);
    if (floor_value) os << " floor=" << *floor_value;
    if (d) os << " d=" << *d;
    if (g_m) os << " g_m=" << *g_m;
    if (a) os << " a=" << *a;
    if (!governing_pairs.empty()) {
      os << " pairs=";
      for (std::size_t k = 0; k < governing_pairs.size(); ++k) {
        os << (k ? "," : "") << "(" << governing_pairs[k].first + 1 << ","
           << governing_pairs[k].second + 1 << ")";
      }
    }
    return os.str();
  }
};

namespace detail {

/// Everything the pair asymptotics need from one kernel/source/pair triple.
struct PairLowNoise {
  ProjectedPairGeometry geometry;
  bool mean_outside_image = false;
  /// 1/4 sum_k (u_k^T m)^2 / lambda_k over the image of Phi (S_i + S_j) Phi^T.
  double mean_term = 0.0;
  double prior_i = 0.0;
  double prior_j = 0.0;

  /// log of v_ij / sqrt(v_i v_j).
  double log_ratio() const {
    const auto& g = geometry;
    return std::log(g.v_ij) - 0.5 * (std::log(g.v_i) + std::log(g.v_j));
  }
};

inline PairLowNoise pair_low_noise(const MeasurementKernel& k, const GmmSource& src,
                                   std::size_t i, std::size_t j, double tol_rel) {
  src.check_pair(i, j);
  if (k.n() != src.dim()) throw InvalidInput("kernel width does not match source dimension");
  PairLowNoise out;
  out.geometry = projected_pair_geometry(k, src, i, j, tol_rel);
  out.prior_i = src.prior(i);
  out.prior_j = src.prior(j);
  if (!(out.prior_i > 0.0 && out.prior_j > 0.0)) {
    throw InvalidInput("low-noise asymptotics need strictly positive priors");
  }
  const Vec m = k.phi * (src.mean(i) - src.mean(j));
  const auto ss = spectrum(congruence(k.phi, src.covariance(i) + src.covariance(j)), tol_rel);
  const double norm = m.norm();
  if (norm > 0.0) {
    const Vec residual = m - ss.image().project(m);
    out.mean_outside_image = residual.norm() > kContainmentTol * norm;
  }
  const Vec coords = ss.eigenvectors.transpose() * m;
  for (Index c = 0; c < ss.dim(); ++c) {
    if (ss.is_nonzero(c)) out.mean_term += 0.25 * coords(c) * coords(c) / ss.eigenvalues(c);
  }
  return out;
}

}  // namespace detail

/// Low-noise profile of the pair bound sqrt(P_i P_j) exp(-K_ij):
///  - Phi(mu_i - mu_j) outside im(Phi (S_i + S_j) Phi^T): exponential decay;
///  - (r_i + r_j)/2 = r_ij: error floor;
///  - otherwise d = (2 r_ij - r_i - r_j)/4,
///    g_m = [2^(r_ij/2) sqrt(P_i P_j) (v_ij / sqrt(v_i v_j))^(-1/2)]^(-1/d),
///    a = exp(mean_term / d).
/// The floor value includes the exp(-mean_term) factor, which is 1 for equal means.
/// Floor or polynomial profile from projected geometry alone, for a pair whose
/// projected mean difference lies in the image of the projected covariance
/// sum. mean_term is 1/4 sum (u^T m)^2 / lambda over that image (0 for equal
/// means).
inline AsymptoticProfile profile_from_geometry(const ProjectedPairGeometry& g, double prior_i,
                                               double prior_j, double mean_term = 0.0) {
  if (!(prior_i > 0.0 && prior_j > 0.0)) {
    throw InvalidInput("low-noise asymptotics need strictly positive priors");
  }
  if (!(g.v_i > 0.0 && g.v_j > 0.0 && g.v_ij > 0.0)) {
    throw InvalidInput("pseudo-determinants must be positive");
  }
  const double log_sqrt_prior = 0.5 * std::log(prior_i * prior_j);
  const double r_ij = static_cast<double>(g.r_ij);
  // log of v_ij / sqrt(v_i v_j)
  const double log_ratio = std::log(g.v_ij) - 0.5 * (std::log(g.v_i) + std::log(g.v_j));
  AsymptoticProfile prof;
  if (g.images_coincide()) {
    prof.kind = DecayKind::error_floor;
    prof.floor_value =
        std::exp(log_sqrt_prior - mean_term - 0.5 * (log_ratio - r_ij * std::numbers::ln2));
    return prof;
  }
  const double d = g.diversity();
  const double log_inner = 0.5 * r_ij * std::numbers::ln2 + log_sqrt_prior - 0.5 * log_ratio;
  prof.kind = DecayKind::polynomial_decay;
  prof.d = d;
  prof.g_m = std::exp(-log_inner / d);
  prof.a = std::exp(mean_term / d);
  return prof;
}

inline AsymptoticProfile asymptotic_pair(const MeasurementKernel& k, const GmmSource& src,
                                         std::size_t i, std::size_t j,
                                         double tol_rel = kDefaultRankTol) {
  const detail::PairLowNoise p = detail::pair_low_noise(k, src, i, j, tol_rel);
  AsymptoticProfile prof;
  if (p.mean_outside_image) {
    prof.kind = DecayKind::exponential_decay;
  } else {
    prof = profile_from_geometry(p.geometry, p.prior_i, p.prior_j, p.mean_term);
  }
  prof.governing_pairs = {{i, j}};
  return prof;
}

/// Kernel-free prediction for a generic random kernel with M rows, where the
/// projected ranks take their probability-one values min(M, r_S).
/// With r1 <= r2 <= r12 the source ranks:
///   images coincide or M <= r1         -> error floor
///   r1 < M <= r2                        -> d = (M - r1) / 4
///   r2 < M < r12                        -> d = (M - (r1 + r2)/2) / 2
///   r12 <= M                            -> d = NO_Dim / 4
/// Nonzero means with (mu_i - mu_j) outside im(S_i + S_j) and M > r12 decay
/// exponentially. The gain depends on the realized kernel and is left unset.
inline AsymptoticProfile asymptotic_pair_source(const GmmSource& src, std::size_t i,
                                                std::size_t j, Index m,
                                                double tol_rel = kDefaultRankTol) {
  if (m < 1) throw InvalidInput("M must be >= 1");
  const PairGeometry g = pair_geometry(src, i, j, tol_rel);
  AsymptoticProfile prof;
  prof.governing_pairs = {{i, j}};

  const Index r1 = std::min(g.r_si, g.r_sj);
  const Index r2 = std::max(g.r_si, g.r_sj);
  const Index r12 = g.r_sij;

  if (m > r12 && detail::component_outside_image(
                     src.mean(i) - src.mean(j),
                     symmetrized(src.covariance(i) + src.covariance(j)), tol_rel)) {
    prof.kind = DecayKind::exponential_decay;
    return prof;
  }
  if (g.no_dim == 0 || m <= r1) {
    prof.kind = DecayKind::error_floor;
    return prof;
  }
  const double md = static_cast<double>(m);
  double d = 0.0;
  if (m <= r2) {
    d = -0.5 * ((static_cast<double>(r1) - md) / 2.0);
  } else if (m < r12) {
    d = -0.5 * ((static_cast<double>(r1 + r2)) / 2.0 - md);
  } else {
    d = -0.5 * ((static_cast<double>(r1 + r2)) / 2.0 - static_cast<double>(r12));
  }
  prof.kind = DecayKind::polynomial_decay;
  prof.d = d;
  return prof;
}

/// Union-bound profile: floors if any pair floors, decays exponentially only
/// if every pair does, and otherwise takes d = min_{i != j} d(i, j) with
///   g_m = [sum_{(i,j) in S_d} P_i 2^(r_ij) (v_ij / sqrt(v_i v_j))^(-1/2)]^(-1/d)
/// over the ordered minimum-diversity pairs S_d. With two classes the pair
/// profile is returned unchanged.
inline AsymptoticProfile multiclass_asymptotics(const MeasurementKernel& k, const GmmSource& src,
                                                double tol_rel = kDefaultRankTol) {
  const std::size_t l = src.num_classes();
  if (l == 2) return asymptotic_pair(k, src, 0, 1, tol_rel);

  struct Entry {
    ClassPair pair;
    detail::PairLowNoise low;
    AsymptoticProfile prof;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i == j) continue;
      entries.push_back({{i, j}, detail::pair_low_noise(k, src, i, j, tol_rel),
                         asymptotic_pair(k, src, i, j, tol_rel)});
    }
  }

  AsymptoticProfile out;
  bool any_floor = false;
  bool all_exponential = true;
  double floor_sum = 0.0;
  double d_min = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (e.prof.kind == DecayKind::error_floor) {
      any_floor = true;
      // P_i exp(-K_ij(0)) for the ordered pair.
      floor_sum += e.low.prior_i * *e.prof.floor_value / std::sqrt(e.low.prior_i * e.low.prior_j);
      if (e.pair.first < e.pair.second) out.governing_pairs.push_back(e.pair);
    }
    if (e.prof.kind != DecayKind::exponential_decay) all_exponential = false;
    if (e.prof.kind == DecayKind::polynomial_decay) d_min = std::min(d_min, *e.prof.d);
  }
  if (any_floor) {
    out.kind = DecayKind::error_floor;
    out.floor_value = floor_sum;
    return out;
  }
  if (all_exponential) {
    out.kind = DecayKind::exponential_decay;
    return out;
  }
  double gain_sum = 0.0;
  for (const auto& e : entries) {
    if (e.prof.kind != DecayKind::polynomial_decay || *e.prof.d != d_min) continue;
    const double r_ij = static_cast<double>(e.low.geometry.r_ij);
    gain_sum += e.low.prior_i * std::exp(r_ij * std::numbers::ln2 - 0.5 * e.low.log_ratio());
    if (e.pair.first < e.pair.second) out.governing_pairs.push_back(e.pair);
  }
  out.kind = DecayKind::polynomial_decay;
  out.d = d_min;
  out.g_m = std::pow(gain_sum, -1.0 / d_min);
  out.a = 1.0;
  return out;
}

/// Second-order expansion of the pair bound in 1/sigma^2 around 0:
///   P_ub ~ constant + linear_coeff / sigma^2 + quadratic_coeff / sigma^4.
/// quadratic_coeff is reported only when the projected means coincide.
struct HighNoiseExpansion {
  double constant = 0.0;
  double linear_coeff = 0.0;
  std::optional<double> quadratic_coeff;
};

/// The five-trace coefficient
///   A = tr[(S/2)^2] - 1/2 tr[B_i^2] - 1/2 tr[B_j^2] + tr[B_i] tr[B_j] - tr^2[S/2]
/// with B = Phi Sigma Phi^T and S = B_i + B_j. Note the last two terms combine
/// to -(tr B_i - tr B_j)^2 / 4.
inline double high_noise_a_coefficient(const Mat& b_i, const Mat& b_j) {
  const Mat half = 0.5 * (b_i + b_j);
  const double tr_i = b_i.trace();
  const double tr_j = b_j.trace();
  const double tr_half = half.trace();
  return (half * half).trace() - 0.5 * (b_i * b_i).trace() - 0.5 * (b_j * b_j).trace() +
         tr_i * tr_j - tr_half * tr_half;
}

inline HighNoiseExpansion high_noise_pair(const MeasurementKernel& k, const GmmSource& src,
                                          std::size_t i, std::size_t j) {
  src.check_pair(i, j);
  if (k.n() != src.dim()) throw InvalidInput("kernel width does not match source dimension");
  const double sqrt_prior = std::sqrt(src.prior(i) * src.prior(j));
  HighNoiseExpansion out;
  out.constant = sqrt_prior;
  const Vec m = k.phi * (src.mean(i) - src.mean(j));
  if (m.squaredNorm() == 0.0) {
    const double a = high_noise_a_coefficient(congruence(k.phi, src.covariance(i)),
                                              congruence(k.phi, src.covariance(j)));
    out.quadratic_coeff = 0.25 * sqrt_prior * a;
  } else {
    out.linear_coeff = -0.125 * sqrt_prior * m.squaredNorm();
  }
  return out;
}

inline constexpr double kGaussianMoment2 = 1.0;
inline constexpr double kGaussianMoment4 = 3.0;

namespace detail {

/// E{tr[(Phi C Phi^T)^2]} for Phi with M i.i.d. N(0, 1) rows, from the
/// eigenvalues of C.
inline double expected_trace_square(const Vec& lambda, Index m) {
  const double md = static_cast<double>(m);
  const double sum = lambda.sum();
  const double sum_sq = lambda.squaredNorm();
  const double cross = sum * sum - sum_sq;  // sum over j != k of lambda_j lambda_k
  return md * (kGaussianMoment4 * sum_sq + kGaussianMoment2 * cross) +
         md * (md - 1.0) * kGaussianMoment2 * sum_sq;
}

}  // namespace detail

/// E{A} over Phi with i.i.d. N(0, 1) entries, assembled from the closed-form
/// expectations of each trace term.
inline double expected_a_coefficient(const Mat& sigma_i, const Mat& sigma_j, Index m) {
  if (m < 1) throw InvalidInput("M must be >= 1");
  const double md = static_cast<double>(m);
  const Mat half = symmetrized(0.5 * (sigma_i + sigma_j));
  const auto eig = [](const Mat& c) {
    return Vec(spectrum(symmetrized(c)).eigenvalues.cwiseMax(0.0));
  };
  const double tr_i = sigma_i.trace();
  const double tr_j = sigma_j.trace();
  const double tr_half = half.trace();

  const double e_cross = md * (tr_i * tr_j + 2.0 * (sigma_i * sigma_j).trace()) +
                         md * (md - 1.0) * tr_i * tr_j;
  const double e_half_sq_trace = md * (tr_half * tr_half + 2.0 * (half * half).trace()) +
                                 md * (md - 1.0) * tr_half * tr_half;
  const double e_i = detail::expected_trace_square(eig(sigma_i), m);
  const double e_j = detail::expected_trace_square(eig(sigma_j), m);
  const double e_half = detail::expected_trace_square(eig(half), m);
  return e_half - 0.5 * e_i - 0.5 * e_j + e_cross - e_half_sq_trace;
}

/// Kernel-averaged high-noise expansion for an unnormalized M-row Gaussian
/// kernel. Equal means give the quadratic term from E{A}; unequal means give
/// the linear term from E{||Phi (mu_i - mu_j)||^2} = M ||mu_i - mu_j||^2.
inline HighNoiseExpansion averaged_high_noise(const GmmSource& src, std::size_t i, std::size_t j,
                                              Index m) {
  src.check_pair(i, j);
  const double sqrt_prior = std::sqrt(src.prior(i) * src.prior(j));
  HighNoiseExpansion out;
  out.constant = sqrt_prior;
  const Vec diff = src.mean(i) - src.mean(j);
  if (diff.squaredNorm() == 0.0) {
    out.quadratic_coeff =
        0.25 * sqrt_prior * expected_a_coefficient(src.covariance(i), src.covariance(j), m);
  } else {
    out.linear_coeff = -0.125 * sqrt_prior * static_cast<double>(m) * diff.squaredNorm();
  }
  return out;
}

/// Single row aligned with (mu1 - mu2), scaled to unit norm. Minimizes the
/// first-order high-noise term for nonzero-mean classes.
inline MeasurementKernel mean_aligned_kernel(const Vec& mu1, const Vec& mu2) {
  const Vec diff = mu1 - mu2;
  if (diff.norm() == 0.0) throw InvalidInput("means coincide; no aligned direction exists");
  return explicit_kernel(diff.normalized().transpose(), "mean-aligned");
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("linear_fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw InvalidInput("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Slopes below this count as flat.
inline constexpr double kFloorSlope = 0.01;

struct AsymptoteFit {
  double d_hat = 0.0;
  std::optional<double> g_m_hat;
  bool floor = false;
};

/// Fit on (sigma^2, log bound) pairs. d_hat is the least-squares slope of
/// log(bound) against log(sigma^2) over the two lowest decades of sigma^2;
/// g_m_hat = sigma^2 bound^(-1/d_hat) at the smallest sigma^2.
inline AsymptoteFit fit_asymptote_log(std::vector<std::pair<double, double>> curve) {
  if (curve.size() < 2) throw InvalidInput("fit_asymptote needs at least two points");
  for (const auto& [s2, lb] : curve) {
    if (!(s2 > 0.0) || !std::isfinite(lb)) {
      throw InvalidInput("fit_asymptote needs sigma^2 > 0 and a strictly positive bound");
    }
  }
  std::sort(curve.begin(), curve.end());
  const double lowest = curve.front().first;
  const double window_top = lowest * 100.0 * (1.0 + 1e-9);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [s2, lb] : curve) {
    if (s2 > window_top) break;
    x.push_back(std::log(s2));
    y.push_back(lb);
  }
  if (x.size() < 2 || x.back() - x.front() < std::log(100.0) * (1.0 - 1e-9)) {
    throw InvalidInput("fit_asymptote needs sigma^2 values spanning two decades at the low end");
  }
  const LinearFit lf = linear_fit(x, y);
  AsymptoteFit fit;
  fit.d_hat = lf.slope;
  fit.floor = lf.slope < kFloorSlope;
  if (!fit.floor) fit.g_m_hat = lowest * std::exp(-curve.front().second / lf.slope);
  return fit;
}

inline AsymptoteFit fit_asymptote(const std::vector<std::pair<double, double>>& curve) {
  std::vector<std::pair<double, double>> logged;
  logged.reserve(curve.size());
  for (const auto& [s2, b] : curve) {
    if (!(b > 0.0)) throw InvalidInput("fit_asymptote needs a strictly positive bound");
    logged.emplace_back(s2, std::log(b));
  }
  return fit_asymptote_log(std::move(logged));
}

}  // namespace gmmcc
