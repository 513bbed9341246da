#pragma once

// Tolerance-aware dense linear algebra on symmetric PSD matrices.
//
// Every spectral quantity (rank, pseudo-determinant, null space, image) for a
// matrix is read off a single SymmetricSpectrum so they stay consistent with
// each other. An eigenvalue counts as nonzero when it exceeds
// tol_rel * max(lambda_max, 1).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmcc/rng.hpp"

namespace gmmcc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kContainmentTol = 1e-8;
inline constexpr double kSymmetryTol = 1e-12;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Orthonormal basis of a subspace of R^ambient_dim, stored as columns.
/// A zero-column basis is the zero subspace.
struct SubspaceBasis {
  Index ambient_dim = 0;
  Mat vectors;

  static SubspaceBasis zero(Index n) { return {n, Mat(n, 0)}; }

  Index dim() const { return vectors.cols(); }
  bool empty() const { return vectors.cols() == 0; }

  /// Orthogonal projection of v onto the span.
  Vec project(const Vec& v) const {
    if (empty()) return Vec::Zero(v.size());
    return vectors * (vectors.transpose() * v);
  }
};

inline bool all_finite(const Mat& a) { return a.allFinite(); }

/// Returns (A + A^T) / 2. Products such as Phi * Sigma * Phi^T are only
/// symmetric up to rounding, so callers pass them through here first.
inline Mat symmetrized(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Phi * Sigma * Phi^T, symmetrized.
inline Mat congruence(const Mat& phi, const Mat& sigma) {
  return symmetrized(phi * sigma * phi.transpose());
}

inline void require_symmetric(const Mat& a, const char* what = "matrix") {
  if (a.rows() != a.cols()) {
    throw InvalidInput(std::string(what) + " must be square");
  }
  if (!all_finite(a)) {
    throw InvalidInput(std::string(what) + " has non-finite entries");
  }
  if (a.size() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw InvalidInput(std::string(what) + " is not symmetric");
  }
}

/// One symmetric eigendecomposition plus the rank threshold derived from it.
/// Eigenvalues are stored in ascending order (Eigen's convention), so the
/// null-space eigenvectors occupy the leading columns.
struct SymmetricSpectrum {
  Vec eigenvalues;
  Mat eigenvectors;
  double threshold = 0.0;
  Index rank = 0;

  Index dim() const { return eigenvalues.size(); }
  Index nullity() const { return dim() - rank; }

  bool is_nonzero(Index k) const { return eigenvalues(k) > threshold; }

  /// Eigenvalues with everything at or below the threshold set to exactly 0.
  Vec clipped_eigenvalues() const {
    Vec out = eigenvalues;
    for (Index k = 0; k < out.size(); ++k) {
      if (!is_nonzero(k)) out(k) = 0.0;
    }
    return out;
  }

  double pseudo_det() const { return std::exp(log_pseudo_det()); }

  double log_pseudo_det() const {
    double acc = 0.0;
    for (Index k = 0; k < dim(); ++k) {
      if (is_nonzero(k)) acc += std::log(eigenvalues(k));
    }
    return acc;
  }

  SubspaceBasis null_space() const {
    return {dim(), eigenvectors.leftCols(nullity())};
  }

  SubspaceBasis image() const { return {dim(), eigenvectors.rightCols(rank)}; }
};

inline SymmetricSpectrum spectrum(const Mat& a, double tol_rel = kDefaultRankTol) {
  require_symmetric(a);
  if (!(tol_rel > 0.0)) throw InvalidInput("tol_rel must be positive");
  SymmetricSpectrum s;
  if (a.size() == 0) {
    s.eigenvalues = Vec(0);
    s.eigenvectors = Mat(0, 0);
    s.threshold = tol_rel;
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("symmetric eigendecomposition failed");
  }
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  s.threshold = tol_rel * std::max(s.eigenvalues.maxCoeff(), 1.0);
  s.rank = (s.eigenvalues.array() > s.threshold).count();
  return s;
}

inline Index effective_rank(const Mat& a, double tol_rel = kDefaultRankTol) {
  return spectrum(a, tol_rel).rank;
}

/// Product of the eigenvalues above the rank threshold; 1 for rank 0.
inline double pseudo_det(const Mat& a, double tol_rel = kDefaultRankTol) {
  return spectrum(a, tol_rel).pseudo_det();
}

inline SubspaceBasis null_space_basis(const Mat& a, double tol_rel = kDefaultRankTol) {
  return spectrum(a, tol_rel).null_space();
}

/// Orthonormal basis of the part of span(outer) orthogonal to span(inner).
/// Requires span(inner) to lie inside span(outer) (residual <= 1e-8).
inline SubspaceBasis complement_basis_within(const SubspaceBasis& inner,
                                             const SubspaceBasis& outer) {
  if (inner.ambient_dim != outer.ambient_dim) {
    throw InvalidInput("complement_basis_within: ambient dimensions differ");
  }
  for (Index c = 0; c < inner.dim(); ++c) {
    const Vec q = inner.vectors.col(c);
    if ((q - outer.project(q)).norm() > kContainmentTol) {
      throw InvalidInput("complement_basis_within: inner span not contained in outer span");
    }
  }
  const Index k = outer.dim() - inner.dim();
  if (k < 0) {
    throw InvalidInput("complement_basis_within: inner has more vectors than outer");
  }
  if (k == 0) return SubspaceBasis::zero(outer.ambient_dim);

  Mat residual = outer.vectors;
  if (!inner.empty()) {
    residual -= inner.vectors * (inner.vectors.transpose() * outer.vectors);
  }
  // Pivoted QR keeps axis-aligned inputs axis-aligned.
  Eigen::ColPivHouseholderQR<Mat> qr(residual);
  Mat q = qr.householderQ();
  Mat basis = q.leftCols(k);
  if (!inner.empty()) {
    basis -= inner.vectors * (inner.vectors.transpose() * basis);
    Eigen::HouseholderQR<Mat> reqr(basis);
    Mat rq = reqr.householderQ();
    Mat r = reqr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    basis = rq.leftCols(k);
    for (Index c = 0; c < k; ++c) {
      if (r(c, c) < 0.0) basis.col(c) *= -1.0;
    }
  }
  return {outer.ambient_dim, basis};
}

/// Maximal linearly independent subset of A's rows, kept in original order.
/// Greedy: a row is kept when its squared residual against the rows already
/// kept exceeds the rank threshold of A^T A.
inline Mat independent_row_select(const Mat& a, double tol_rel = kDefaultRankTol) {
  if (!all_finite(a)) throw InvalidInput("independent_row_select: non-finite input");
  if (a.rows() == 0) return Mat(0, a.cols());
  const SymmetricSpectrum gram = spectrum(symmetrized(a.transpose() * a), tol_rel);

  Mat kept_dirs(a.cols(), 0);
  std::vector<Index> kept;
  for (Index r = 0; r < a.rows(); ++r) {
    Vec res = a.row(r).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      if (kept_dirs.cols() > 0) res -= kept_dirs * (kept_dirs.transpose() * res);
    }
    if (res.squaredNorm() > gram.threshold) {
      kept_dirs.conservativeResize(Eigen::NoChange, kept_dirs.cols() + 1);
      kept_dirs.col(kept_dirs.cols() - 1) = res.normalized();
      kept.push_back(r);
    }
  }
  Mat out(static_cast<Index>(kept.size()), a.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.row(static_cast<Index>(k)) = a.row(kept[k]);
  }
  return out;
}

/// Fills a rows x cols matrix with i.i.d. N(0, 1) entries in row-major order.
inline Mat gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat g(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
  }
  return g;
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// diagonal of R forced nonnegative so the factorization is unique.
inline Mat random_orthogonal(Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("random_orthogonal: n must be >= 1");
  Rng rng = make_rng(seed);
  const Mat g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat& packed = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

/// n x r factor F with F F^T = A, r = effective rank.
inline Mat psd_sqrt_factor(const Mat& a, double tol_rel = kDefaultRankTol) {
  const SymmetricSpectrum s = spectrum(a, tol_rel);
  Mat f(s.dim(), s.rank);
  const Index offset = s.nullity();
  for (Index c = 0; c < s.rank; ++c) {
    f.col(c) = std::sqrt(s.eigenvalues(offset + c)) * s.eigenvectors.col(offset + c);
  }
  return f;
}

}  // namespace gmmcc
