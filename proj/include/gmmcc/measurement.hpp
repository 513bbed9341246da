#pragma once

// Measurement kernels: i.i.d. Gaussian random kernels, diversity-maximizing
// two-class designs built from null-space complements, and the greedy
// multi-class designs that stack per-pair blocks under a measurement budget.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gmmcc/linalg.hpp"
#include "gmmcc/rng.hpp"
#include "gmmcc/source.hpp"

namespace gmmcc {

using ClassPair = std::pair<std::size_t, std::size_t>;

struct RandomProvenance {
  std::uint64_t seed = 0;
  bool normalized = true;
};

struct DesignedProvenance {
  std::string recipe;
  std::vector<ClassPair> pairs;
};

/// Caller-supplied matrix (identity, paper-style fixed rows, test fixtures).
struct ExplicitProvenance {
  std::string label;
};

using KernelProvenance = std::variant<RandomProvenance, DesignedProvenance, ExplicitProvenance>;

struct MeasurementKernel {
  Mat phi;
  KernelProvenance provenance;

  Index m() const { return phi.rows(); }
  Index n() const { return phi.cols(); }

  bool is_random() const { return std::holds_alternative<RandomProvenance>(provenance); }
  bool is_designed() const { return std::holds_alternative<DesignedProvenance>(provenance); }

  /// Short label used in CSV output: "random", "designed" or the explicit label.
  std::string kind() const {
    if (is_random()) return "random";
    if (is_designed()) return "designed";
    return std::get<ExplicitProvenance>(provenance).label;
  }

  std::string describe() const {
    std::ostringstream os;
    if (const auto* r = std::get_if<RandomProvenance>(&provenance)) {
      os << "random(seed=" << r->seed << ", normalized=" << (r->normalized ? "true" : "false")
         << ")";
    } else if (const auto* d = std::get_if<DesignedProvenance>(&provenance)) {
      os << "designed(" << d->recipe;
      if (!d->pairs.empty()) {
        os << ", pairs=";
        for (std::size_t k = 0; k < d->pairs.size(); ++k) {
          os << (k ? " " : "") << d->pairs[k].first + 1 << "-" << d->pairs[k].second + 1;
        }
      }
      os << ")";
    } else {
      os << "explicit(" << std::get<ExplicitProvenance>(provenance).label << ")";
    }
    os << " M=" << m();
    return os.str();
  }
};

inline MeasurementKernel explicit_kernel(Mat phi, std::string label = "explicit") {
  if (phi.cols() < 1 || !phi.allFinite()) throw InvalidInput("kernel must be finite with N >= 1");
  return {std::move(phi), ExplicitProvenance{std::move(label)}};
}

/// Raised when no kernel can separate a pair: their images coincide (NO_Dim = 0).
class DesignImpossible : public std::runtime_error {
 public:
  DesignImpossible(std::size_t i, std::size_t j, Index no_dim)
      : std::runtime_error(message(i, j, no_dim)), pair_(i, j), no_dim_(no_dim) {}

  ClassPair pair() const { return pair_; }
  Index no_dim() const { return no_dim_; }

 private:
  static std::string message(std::size_t i, std::size_t j, Index no_dim) {
    std::ostringstream os;
    os << "design impossible: classes " << i + 1 << " and " << j + 1
       << " span the same subspace (NO_Dim = " << no_dim << ")";
    return os.str();
  }

  ClassPair pair_;
  Index no_dim_;
};

/// Raised when the multi-class budget loop deletes every row.
class EmptyDesign : public std::runtime_error {
 public:
  EmptyDesign()
      : std::runtime_error("empty design: the measurement budget is too small for the pair blocks") {}
};

/// Phi' with i.i.d. N(0, 1) entries, optionally scaled by M / tr(Phi' Phi'^T).
inline MeasurementKernel random_gaussian_kernel(Index m, Index n, std::uint64_t seed,
                                                bool normalized = true) {
  if (m < 1 || n < 1) throw InvalidInput("random_gaussian_kernel: M and N must be >= 1");
  Rng rng = make_rng(seed);
  Mat phi = gaussian_matrix(m, n, rng);
  if (normalized) {
    // The scale is M / tr(Phi' Phi'^T) with no square root.
    phi *= static_cast<double>(m) / phi.squaredNorm();
  }
  return {std::move(phi), RandomProvenance{seed, normalized}};
}

/// Ranks and pseudo-determinants of a class pair after projection by Phi.
struct ProjectedPairGeometry {
  Index r_i = 0;
  Index r_j = 0;
  Index r_ij = 0;
  double v_i = 1.0;
  double v_j = 1.0;
  double v_ij = 1.0;

  /// 2 r_ij - r_i - r_j, i.e. four times the diversity-order.
  Index non_overlap() const { return 2 * r_ij - r_i - r_j; }
  double diversity() const { return 0.25 * static_cast<double>(non_overlap()); }
  bool images_coincide() const { return non_overlap() == 0; }
};

inline ProjectedPairGeometry projected_pair_geometry(const MeasurementKernel& k,
                                                     const GmmSource& src, std::size_t i,
                                                     std::size_t j,
                                                     double tol_rel = kDefaultRankTol) {
  src.check_pair(i, j);
  if (k.n() != src.dim()) throw InvalidInput("kernel width does not match source dimension");
  const auto si = spectrum(congruence(k.phi, src.covariance(i)), tol_rel);
  const auto sj = spectrum(congruence(k.phi, src.covariance(j)), tol_rel);
  const auto sij =
      spectrum(congruence(k.phi, src.covariance(i) + src.covariance(j)), tol_rel);
  return {si.rank, sj.rank, sij.rank, si.pseudo_det(), sj.pseudo_det(), sij.pseudo_det()};
}

/// Row-selection rule when fewer rows than the full complement are wanted.
enum class RowSplit {
  /// M1 = min(n1, ceil(M/2)) rows from the first complement, the rest from the second.
  balanced,
  /// First M rows in first-complement-then-second order.
  in_order,
};

/// Orthonormal complements inside each class's null space of the shared null
/// space Null(S1) n Null(S2). first spans Null(S1) minus the intersection,
/// second spans Null(S2) minus the intersection.
struct NullComplements {
  SubspaceBasis shared;
  SubspaceBasis first;
  SubspaceBasis second;

  Index no_dim() const { return first.dim() + second.dim(); }
};

inline NullComplements null_complements(const Mat& sigma1, const Mat& sigma2,
                                        double tol_rel = kDefaultRankTol) {
  if (sigma1.rows() != sigma2.rows()) throw InvalidInput("covariance sizes differ");
  NullComplements nc;
  nc.shared = null_space_basis(symmetrized(sigma1 + sigma2), tol_rel);
  nc.first = complement_basis_within(nc.shared, null_space_basis(sigma1, tol_rel));
  nc.second = complement_basis_within(nc.shared, null_space_basis(sigma2, tol_rel));
  return nc;
}

namespace detail {

inline Mat complement_rows(const NullComplements& nc, Index count, RowSplit split) {
  const Index n1 = nc.first.dim();
  const Index n2 = nc.second.dim();
  count = std::min(count, n1 + n2);
  Index take1 = 0;
  Index take2 = 0;
  if (split == RowSplit::in_order) {
    take1 = std::min(n1, count);
    take2 = count - take1;
  } else {
    take1 = std::min(n1, (count + 1) / 2);
    take2 = count - take1;
    if (take2 > n2) {
      take2 = n2;
      take1 = count - n2;
    }
  }
  Mat rows(take1 + take2, nc.shared.ambient_dim);
  rows.topRows(take1) = nc.first.vectors.leftCols(take1).transpose();
  rows.bottomRows(take2) = nc.second.vectors.leftCols(take2).transpose();
  return rows;
}

inline Mat two_class_rows(const Mat& sigma1, const Mat& sigma2, Index count, RowSplit split,
                          std::size_t i, std::size_t j, double tol_rel) {
  const NullComplements nc = null_complements(sigma1, sigma2, tol_rel);
  if (nc.no_dim() == 0) throw DesignImpossible(i, j, 0);
  return complement_rows(nc, count, split);
}

/// Null-space component of d with respect to im(S), or nothing when d lies in
/// im(S) up to a relative residual of 1e-8.
inline std::optional<Vec> component_outside_image(const Vec& d, const Mat& s,
                                                  double tol_rel = kDefaultRankTol) {
  const double norm = d.norm();
  if (norm == 0.0) return std::nullopt;
  const SymmetricSpectrum sp = spectrum(s, tol_rel);
  const Vec residual = d - sp.image().project(d);
  if (residual.norm() <= kContainmentTol * norm) return std::nullopt;
  return residual;
}

}  // namespace detail

/// Diversity-maximizing kernel for two zero-mean classes: rows v^T spanning the
/// complement of the shared null space inside Null(S1), then rows w^T inside
/// Null(S2). With M below the complement size a balanced subset is taken; a
/// larger budget is left unused since extra rows add no diversity.
inline MeasurementKernel design_two_zero_mean(const Mat& sigma1, const Mat& sigma2, Index m,
                                              double tol_rel = kDefaultRankTol) {
  if (m < 1) throw InvalidInput("measurement budget M must be >= 1");
  Mat rows = detail::two_class_rows(sigma1, sigma2, m, RowSplit::balanced, 0, 1, tol_rel);
  return {std::move(rows), DesignedProvenance{"null-complement/balanced", {{0, 1}}}};
}

/// Single-row kernel phi^T with phi the normalized null-space component of
/// (mu1 - mu2) w.r.t. im(S1 + S2) when that component exists; otherwise the
/// zero-mean design.
inline MeasurementKernel design_two_nonzero_mean(const Vec& mu1, const Vec& mu2,
                                                 const Mat& sigma1, const Mat& sigma2, Index m,
                                                 double tol_rel = kDefaultRankTol) {
  if (m < 1) throw InvalidInput("measurement budget M must be >= 1");
  if (mu1.size() != sigma1.rows() || mu2.size() != sigma1.rows()) {
    throw InvalidInput("mean and covariance sizes differ");
  }
  const auto outside =
      detail::component_outside_image(mu1 - mu2, symmetrized(sigma1 + sigma2), tol_rel);
  if (!outside) return design_two_zero_mean(sigma1, sigma2, m, tol_rel);
  Mat row = outside->normalized().transpose();
  return {std::move(row), DesignedProvenance{"mean-null-direction", {{0, 1}}}};
}

/// Greedy multi-class design for zero-mean classes:
///   1. find the pair with the fewest non-overlapping dimensions, n*;
///   2. build an n*-row null-complement block for every pair (rows in order);
///   3. stack the blocks;
///   4. while the stack's rank exceeds M, drop the last row of every block.
/// Returns the linearly independent rows of the final stack.
inline MeasurementKernel design_multi_zero_mean(const GmmSource& src, Index m,
                                                double tol_rel = kDefaultRankTol) {
  if (m < 1) throw InvalidInput("measurement budget M must be >= 1");
  const std::size_t l = src.num_classes();

  Index min_no_dim = -1;
  ClassPair worst{0, 1};
  std::vector<ClassPair> pairs;
  std::vector<NullComplements> complements;
  for (std::size_t i = 0; i + 1 < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) {
      pairs.emplace_back(i, j);
      complements.push_back(null_complements(src.covariance(i), src.covariance(j), tol_rel));
      const Index nd = complements.back().no_dim();
      if (min_no_dim < 0 || nd < min_no_dim) {
        min_no_dim = nd;
        worst = {i, j};
      }
    }
  }
  if (min_no_dim == 0) throw DesignImpossible(worst.first, worst.second, 0);

  std::vector<Mat> blocks;
  for (const auto& nc : complements) {
    blocks.push_back(detail::complement_rows(nc, min_no_dim, RowSplit::in_order));
  }

  const Index n = src.dim();
  for (;;) {
    Index total = 0;
    for (const auto& b : blocks) total += b.rows();
    if (total == 0) throw EmptyDesign();
    Mat stack(total, n);
    Index at = 0;
    for (const auto& b : blocks) {
      stack.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    Mat independent = independent_row_select(stack, tol_rel);
    if (independent.rows() <= m) {
      if (independent.rows() == 0) throw EmptyDesign();
      return {std::move(independent),
              DesignedProvenance{"multi-class greedy (zero-mean)", std::move(pairs)}};
    }
    for (auto& b : blocks) {
      if (b.rows() > 0) b = Mat(b.topRows(b.rows() - 1));
    }
  }
}

/// Multi-class design for nonzero-mean classes: if every pair's mean difference
/// has a component outside im(S_i + S_j), stack one such null direction per
/// pair and return the independent rows when they fit the budget. Any failure
/// falls back to the zero-mean greedy design.
inline MeasurementKernel design_multi_nonzero_mean(const GmmSource& src, Index m,
                                                   double tol_rel = kDefaultRankTol) {
  if (m < 1) throw InvalidInput("measurement budget M must be >= 1");
  const std::size_t l = src.num_classes();
  std::vector<ClassPair> pairs;
  std::vector<Vec> directions;
  for (std::size_t i = 0; i + 1 < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) {
      const auto outside = detail::component_outside_image(
          src.mean(i) - src.mean(j), symmetrized(src.covariance(i) + src.covariance(j)), tol_rel);
      if (!outside) return design_multi_zero_mean(src, m, tol_rel);
      pairs.emplace_back(i, j);
      directions.push_back(outside->normalized());
    }
  }
  Mat stack(static_cast<Index>(directions.size()), src.dim());
  for (std::size_t k = 0; k < directions.size(); ++k) {
    stack.row(static_cast<Index>(k)) = directions[k].transpose();
  }
  Mat independent = independent_row_select(stack, tol_rel);
  if (independent.rows() > m) return design_multi_zero_mean(src, m, tol_rel);
  return {std::move(independent),
          DesignedProvenance{"multi-class mean-null-directions", std::move(pairs)}};
}

/// Picks the design recipe that fits the source: two-class or multi-class,
/// the nonzero-mean variants falling back to zero-mean designs on their own.
inline MeasurementKernel design_kernel(const GmmSource& src, Index m,
                                       double tol_rel = kDefaultRankTol) {
  if (src.num_classes() == 2) {
    return design_two_nonzero_mean(src.mean(0), src.mean(1), src.covariance(0),
                                   src.covariance(1), m, tol_rel);
  }
  return design_multi_nonzero_mean(src, m, tol_rel);
}

}  // namespace gmmcc
