#include <gtest/gtest.h>

#include <cmath>

#include "gmmcc/linalg.hpp"
#include "test_util.hpp"

using namespace gmmcc;
using gmmcc::testing::diag;
using gmmcc::testing::orthonormality_error;
using gmmcc::testing::random_psd;

TEST(EffectiveRank, CountsNonzeroEigenvalues) {
  EXPECT_EQ(effective_rank(diag({1, 1, 0, 0, 0, 0})), 2);
  EXPECT_EQ(effective_rank(Mat::Zero(3, 3)), 0);
  EXPECT_EQ(effective_rank(diag({1, 1e-14})), 1);
}

TEST(EffectiveRank, ThresholdUsesUnitFloor) {
  // lambda_max < 1, so the threshold is tol itself rather than tol * lambda_max.
  EXPECT_EQ(effective_rank(diag({1e-3, 5e-11}), 1e-10), 1);
  EXPECT_EQ(effective_rank(diag({1e-3, 2e-10}), 1e-10), 2);
  // lambda_max > 1 scales the threshold.
  EXPECT_EQ(effective_rank(diag({1e4, 5e-7}), 1e-10), 1);
  EXPECT_EQ(effective_rank(diag({1e4, 5e-6}), 1e-10), 2);
  EXPECT_EQ(effective_rank(diag({1e4, 5e-6}), 1e-10 * 100), 1);
}

TEST(EffectiveRank, RejectsBadInput) {
  Mat a(2, 2);
  a << 1, 0.5, 0, 1;
  EXPECT_THROW(effective_rank(a), InvalidInput);
  Mat b = Mat::Identity(2, 2);
  b(0, 0) = std::nan("");
  EXPECT_THROW(effective_rank(b), InvalidInput);
  EXPECT_THROW(effective_rank(Mat::Identity(2, 3)), InvalidInput);
  EXPECT_THROW(effective_rank(Mat::Identity(2, 2), 0.0), InvalidInput);
}

TEST(EffectiveRank, InvariantUnderOrthogonalConjugation) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Index rank = static_cast<Index>(1 + s % 5);
    const Mat a = random_psd(6, rank, 100 + s);
    const Mat q = random_orthogonal(6, 900 + s);
    EXPECT_EQ(effective_rank(a), rank);
    EXPECT_EQ(effective_rank(symmetrized(q * a * q.transpose())), rank);
  }
}

TEST(PseudoDet, ProductOfNonzeroEigenvalues) {
  EXPECT_NEAR(pseudo_det(diag({2, 3, 0})), 6.0, 1e-12);
  EXPECT_NEAR(pseudo_det(Mat::Identity(3, 3)), 1.0, 1e-12);
  EXPECT_NEAR(pseudo_det(diag({4, 0, 0})), 4.0, 1e-12);
  EXPECT_EQ(pseudo_det(Mat::Zero(2, 2)), 1.0);
}

TEST(PseudoDet, MatchesDeterminantAtFullRankAndIsPositive) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Mat full = random_psd(4, 4, 300 + s);
    EXPECT_NEAR(pseudo_det(full) / full.determinant(), 1.0, 1e-9);
    const Mat low = random_psd(5, 2, 400 + s);
    EXPECT_GT(pseudo_det(low), 0.0);
  }
}

TEST(PseudoDet, RotationInvariant) {
  const Mat q = random_orthogonal(3, 5);
  const Mat a = symmetrized(q * diag({2, 3, 0}) * q.transpose());
  EXPECT_NEAR(pseudo_det(a), 6.0, 1e-10);
}

TEST(NullSpaceBasis, DiagonalCases) {
  const SubspaceBasis b = null_space_basis(diag({1, 1, 0}));
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(std::abs(b.vectors(2, 0)), 1.0, 1e-12);

  EXPECT_EQ(null_space_basis(Mat::Identity(3, 3)).dim(), 0);

  const SubspaceBasis z = null_space_basis(Mat::Zero(2, 2));
  EXPECT_EQ(z.dim(), 2);
  EXPECT_LT(orthonormality_error(z.vectors), 1e-12);
}

TEST(NullSpaceBasis, DimensionPlusRankIsAmbient) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Index r = static_cast<Index>(s % 6);
    const Mat a = r == 0 ? Mat(Mat::Zero(6, 6)) : random_psd(6, r, 500 + s);
    const SubspaceBasis b = null_space_basis(a);
    EXPECT_EQ(b.dim() + effective_rank(a), 6);
    EXPECT_LT(orthonormality_error(b.vectors), 1e-10);
    if (!b.empty()) {
      EXPECT_LT((a * b.vectors).norm(), 1e-8);
    }
  }
}

TEST(NullSpaceBasis, NullOfSumIsIntersectionOfNulls) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Mat a = random_psd(6, 2, 600 + s);
    const Mat b = random_psd(6, 3, 700 + s);
    const SubspaceBasis shared = null_space_basis(symmetrized(a + b));
    // Generic subspaces of dims 2 and 3 in R^6: the sum has rank 5.
    EXPECT_EQ(shared.dim(), 1);
    EXPECT_LT((a * shared.vectors).norm(), 1e-8);
    EXPECT_LT((b * shared.vectors).norm(), 1e-8);
    // Conversely a vector in both null spaces lies in the shared one.
    const SubspaceBasis na = null_space_basis(a);
    const SubspaceBasis nb = null_space_basis(b);
    const Mat stacked = (Mat(6, na.dim() + nb.dim()) << na.vectors, -nb.vectors).finished();
    Eigen::FullPivLU<Mat> lu(stacked);
    const Mat kernel = lu.kernel();
    ASSERT_EQ(kernel.cols(), 1);
    const Vec v = na.vectors * kernel.col(0).head(na.dim());
    EXPECT_LT((v - shared.project(v)).norm(), 1e-8 * v.norm());
  }
}

TEST(ComplementBasisWithin, SpecExamples) {
  const Mat e = Mat::Identity(3, 3);
  const SubspaceBasis e3{3, e.col(2)};
  const SubspaceBasis e23{3, e.middleCols(1, 2)};

  const SubspaceBasis a = complement_basis_within(SubspaceBasis::zero(3), e3);
  ASSERT_EQ(a.dim(), 1);
  EXPECT_NEAR(std::abs(a.vectors(2, 0)), 1.0, 1e-12);

  const SubspaceBasis b = complement_basis_within(e3, e23);
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(std::abs(b.vectors(1, 0)), 1.0, 1e-12);

  EXPECT_EQ(complement_basis_within(e23, e23).dim(), 0);
}

TEST(ComplementBasisWithin, RejectsInnerOutsideOuter) {
  const Mat e = Mat::Identity(3, 3);
  EXPECT_THROW(complement_basis_within({3, e.col(0)}, {3, e.middleCols(1, 2)}), InvalidInput);
  EXPECT_THROW(complement_basis_within({2, Mat::Identity(2, 1)}, {3, e.col(0)}), InvalidInput);
}

TEST(ComplementBasisWithin, OrthonormalInsideOuterAndOrthogonalToInner) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Mat q = random_orthogonal(7, 800 + s);
    const SubspaceBasis outer{7, q.leftCols(5)};
    // A rotated 2-dim subspace of the outer span.
    const Mat mix = random_orthogonal(5, 850 + s).leftCols(2);
    const SubspaceBasis inner{7, q.leftCols(5) * mix};
    const SubspaceBasis c = complement_basis_within(inner, outer);
    ASSERT_EQ(c.dim(), 3);
    EXPECT_LT(orthonormality_error(c.vectors), 1e-10);
    EXPECT_LT((inner.vectors.transpose() * c.vectors).norm(), 1e-10);
    EXPECT_LT((c.vectors - outer.vectors * (outer.vectors.transpose() * c.vectors)).norm(), 1e-10);
  }
}

TEST(IndependentRowSelect, SpecExamples) {
  Mat a(3, 2);
  a << 1, 0, 2, 0, 0, 1;
  const Mat r = independent_row_select(a);
  ASSERT_EQ(r.rows(), 2);
  EXPECT_EQ(r.row(0), a.row(0));
  EXPECT_EQ(r.row(1), a.row(2));

  EXPECT_EQ(independent_row_select(Mat::Identity(3, 3)), Mat::Identity(3, 3));

  const Mat z = independent_row_select(Mat::Zero(2, 3));
  EXPECT_EQ(z.rows(), 0);
  EXPECT_EQ(z.cols(), 3);
}

TEST(IndependentRowSelect, RowCountMatchesRankOfGram) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = make_rng(1000 + s);
    const Index rank = static_cast<Index>(1 + s % 4);
    const Mat a = gaussian_matrix(8, rank, rng) * gaussian_matrix(rank, 5, rng);
    const Mat r = independent_row_select(a);
    EXPECT_EQ(r.rows(), rank);
    EXPECT_EQ(effective_rank(symmetrized(r.transpose() * r)), r.rows());
    EXPECT_EQ(effective_rank(symmetrized(a.transpose() * a)), r.rows());
  }
}

TEST(RandomOrthogonal, OrthogonalAndDeterministic) {
  const Mat one = random_orthogonal(1, 3);
  EXPECT_NEAR(std::abs(one(0, 0)), 1.0, 1e-15);

  const Mat u = random_orthogonal(4, 7);
  EXPECT_LT((u.transpose() * u - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(u, random_orthogonal(4, 7));
  EXPECT_NE(u, random_orthogonal(4, 8));
  EXPECT_THROW(random_orthogonal(0, 1), InvalidInput);
}

TEST(RandomOrthogonal, SignConventionMakesRFactorNonnegative) {
  // Recomputing R = U^T G must give a nonnegative diagonal.
  Rng rng = make_rng(11);
  const Mat g = gaussian_matrix(5, 5, rng);
  const Mat u = random_orthogonal(5, 11);
  const Mat r = u.transpose() * g;
  for (Index k = 0; k < 5; ++k) EXPECT_GE(r(k, k), 0.0);
  EXPECT_LT(r.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm(), 1e-10);
}

TEST(PsdSqrtFactor, Cases) {
  const Mat f = psd_sqrt_factor(diag({4, 0}));
  ASSERT_EQ(f.cols(), 1);
  EXPECT_NEAR(std::abs(f(0, 0)), 2.0, 1e-12);
  EXPECT_NEAR(f(1, 0), 0.0, 1e-12);

  const Mat i = psd_sqrt_factor(Mat::Identity(2, 2));
  EXPECT_EQ(i.cols(), 2);
  EXPECT_LT((i * i.transpose() - Mat::Identity(2, 2)).norm(), 1e-12);

  EXPECT_EQ(psd_sqrt_factor(Mat::Zero(3, 3)).cols(), 0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const Mat a = random_psd(6, 3, 1200 + s);
    const Mat fa = psd_sqrt_factor(a);
    EXPECT_EQ(fa.cols(), 3);
    EXPECT_LT((fa * fa.transpose() - a).norm() / a.norm(), 1e-8);
  }
}

TEST(Spectrum, SharedThresholdKeepsQuantitiesConsistent) {
  const SymmetricSpectrum s = spectrum(diag({5, 0, 2, 0}));
  EXPECT_EQ(s.rank, 2);
  EXPECT_EQ(s.null_space().dim(), 2);
  EXPECT_EQ(s.image().dim(), 2);
  EXPECT_NEAR(s.pseudo_det(), 10.0, 1e-12);
  EXPECT_NEAR((s.image().vectors.transpose() * s.null_space().vectors).norm(), 0.0, 1e-12);
}
