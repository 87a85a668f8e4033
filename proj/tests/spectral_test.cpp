#include <gtest/gtest.h>

#include <Eigen/LU>

#include "curvlab/generators.hpp"
#include "curvlab/spectral.hpp"
#include "test_support.hpp"

namespace curvlab {
namespace {

using testing::basis_vector;
using testing::random_unit;
using testing::unit;

std::vector<CurvatureTensor> osserman_corpus() {
  return {constant_curvature(3, 1.0),
          constant_curvature(5, -2.0),
          complex_space_form(4, 1.0, 1.0, 1),
          complex_space_form(6, 0.5, -1.0, 2),
          quaternionic_space_form(8, 1.0, 1.0, 3),
          clifford_osserman({8, make_clifford_structures(8, 2, 4), 1.0, {0.5, 2.0}})};
}

/// Slopes of the branches leaving a cluster of size m at position `start`
/// of the sorted spectrum, from eigenvalues at phi = +-h. The +h values sorted
/// ascending pair with the -h values sorted descending.
Vector fd_branch_slopes(const CurvatureTensor& t, const Vector& x, const Vector& y, Eigen::Index start,
                        Eigen::Index m, double h) {
  const Vector plus = testing::sorted_eigenvalues(jacobi_matrix(t, std::cos(h) * x + std::sin(h) * y));
  const Vector minus = testing::sorted_eigenvalues(jacobi_matrix(t, std::cos(h) * x - std::sin(h) * y));
  Vector slopes(m);
  for (Eigen::Index k = 0; k < m; ++k) slopes[k] = (plus[start + k] - minus[start + m - 1 - k]) / (2.0 * h);
  return slopes;
}

TEST(SpectralProfile, Examples) {
  auto p = spectral_profile(Matrix((Vector(3) << 0, 1, 1).finished().asDiagonal()));
  EXPECT_EQ(p.eigenvalues, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(p.multiplicities, (std::vector<int>{1, 2}));

  p = spectral_profile(Matrix((Vector(3) << 0, 1, 1 + 1e-9).finished().asDiagonal()), 1e-6);
  ASSERT_EQ(p.eigenvalues.size(), 2u);
  EXPECT_EQ(p.multiplicities, (std::vector<int>{1, 2}));
  EXPECT_NEAR(p.eigenvalues[1], 1 + 5e-10, 1e-15);
  EXPECT_DOUBLE_EQ(p.cluster_tol, 1e-6);
}

TEST(SpectralProfile, ComplexSpaceFormClusters) {
  Rng rng = make_rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = jacobi_profile(complex_space_form(4, 1, 1), random_unit(4, rng));
    ASSERT_EQ(p.eigenvalues.size(), 3u);
    EXPECT_EQ(p.multiplicities, (std::vector<int>{1, 2, 1}));
    EXPECT_NEAR(p.eigenvalues[0], 0.0, 1e-12);
    EXPECT_NEAR(p.eigenvalues[1], 1.0, 1e-12);
    EXPECT_NEAR(p.eigenvalues[2], 4.0, 1e-12);
    EXPECT_TRUE(p.regular);
  }
}

TEST(SpectralProfile, DefaultToleranceScalesWithRange) {
  const auto p = spectral_profile(Matrix((Vector(3) << -1, 0, 3).finished().asDiagonal()));
  EXPECT_DOUBLE_EQ(p.cluster_tol, 4e-6);
  EXPECT_EQ(p.multiplicities, (std::vector<int>{1, 1, 1}));
}

TEST(SpectralProfile, IrregularWhenClustersNearlyTouch) {
  const auto p = spectral_profile(Matrix((Vector(3) << 0, 1, 1 + 5e-6).finished().asDiagonal()), 1e-6);
  EXPECT_EQ(p.multiplicities, (std::vector<int>{1, 1, 1}));
  EXPECT_FALSE(p.regular);
}

TEST(SpectralProfile, RejectsBadInput) {
  EXPECT_THROW(spectral_profile(Matrix::Zero(2, 3)), DimensionError);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(spectral_profile(m), NonFiniteError);
}

TEST(SpectralProfile, CharpolyMatchesDeterminant) {
  Rng rng = make_rng(3);
  for (int n = 2; n <= 7; ++n) {
    const auto t = random_curvature(n, static_cast<std::uint64_t>(n), 2.0);
    const Vector x = random_unit(n, rng);
    const Matrix m = jacobi_operator(t, x).matrix;
    const auto p = spectral_profile(m);
    ASSERT_EQ(p.charpoly.size(), static_cast<std::size_t>(n + 1));
    EXPECT_EQ(p.charpoly[0], 1.0);
    for (double s : {-1.5, -0.3, 0.2, 0.7, 1.9}) {
      const double det = (s * Matrix::Identity(n, n) - m).determinant();
      double poly = 0.0;
      for (double c : p.charpoly) poly = poly * s + c;
      double scale = 0.0;
      for (std::size_t k = 0; k < p.charpoly.size(); ++k) scale += std::abs(p.charpoly[k]) * std::pow(std::abs(s), n - static_cast<int>(k));
      EXPECT_NEAR(poly, det, 1e-9 * scale) << "n=" << n << " s=" << s;
    }
  }
}

TEST(SpectralProfile, JacobiAlwaysHasZeroEigenvalue) {
  Rng rng = make_rng(4);
  for (int n = 2; n <= 8; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = jacobi_profile(random_curvature(n, seed), random_unit(n, rng));
      EXPECT_LE(p.spectrum.cwiseAbs().minCoeff(), 1e-10);
    }
  }
}

TEST(SphereSample, Examples) {
  const auto one = sample_unit_sphere(3, 1, 0);
  ASSERT_EQ(one.points.size(), 1u);
  EXPECT_NEAR(one.points[0].norm(), 1.0, 1e-15);

  const auto a = sample_unit_sphere(5, 50, 9), b = sample_unit_sphere(5, 50, 9);
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);

  const auto s = sample_unit_sphere(4, 200, 1);
  Vector mean = Vector::Zero(4);
  for (const auto& p : s.points) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    mean += p;
  }
  EXPECT_LT((mean / 200.0).norm(), 0.2);
  EXPECT_THROW(sample_unit_sphere(3, 0, 1), Error);
}

TEST(SphereSample, RegularFlags) {
  auto s = sample_unit_sphere(4, 20, 5);
  flag_regular(complex_space_form(4, 1, 1), s);
  ASSERT_EQ(s.regular_flags.size(), 20u);
  for (bool f : s.regular_flags) EXPECT_TRUE(f);
}

TEST(OssermanReport, ConstantCurvatureIsExact) {
  const auto r = osserman_report(constant_curvature(5, 2.0), sample_unit_sphere(5, 100, 1));
  EXPECT_LE(r.profile_spread, 1e-12);
  EXPECT_TRUE(r.verdict);
}

TEST(OssermanReport, SinglePlaneFails) {
  const auto r = osserman_report(single_plane(3), sample_unit_sphere(3, 200, 3));
  EXPECT_GE(r.profile_spread, 0.5);
  EXPECT_FALSE(r.verdict);
  // Witness reproduces the spread.
  const Vector a = testing::sorted_eigenvalues(jacobi_matrix(single_plane(3), r.witness_x));
  const Vector b = testing::sorted_eigenvalues(jacobi_matrix(single_plane(3), r.witness_y));
  EXPECT_NEAR((a - b).cwiseAbs().maxCoeff(), r.profile_spread, 1e-12);
  EXPECT_GT(r.coeff_spread, 0.1);
}

TEST(OssermanReport, ComplexSpaceFormPasses) {
  const auto r = osserman_report(complex_space_form(4, 1, 1), sample_unit_sphere(4, 200, 1));
  EXPECT_LE(r.profile_spread, 1e-9);
  EXPECT_LE(r.coeff_spread, 1e-9);
  EXPECT_TRUE(r.verdict);
}

TEST(OssermanReport, RejectsMismatchedSample) {
  EXPECT_THROW(osserman_report(constant_curvature(3, 1), sample_unit_sphere(4, 5, 1)), DimensionError);
}

TEST(DualityReport, ConstantCurvature) {
  const auto r = duality_report(constant_curvature(4, 3.0), sample_unit_sphere(4, 50, 1));
  EXPECT_LE(r.max_residual, 1e-10);
  EXPECT_TRUE(r.verdict);
  // Three eigenvectors orthogonal to X plus four probes per sample.
  EXPECT_EQ(r.records.size(), 50u * 7u);
}

TEST(DualityReport, SinglePlaneWitnessResidualIsOneHalf) {
  const Vector x = unit((Vector(3) << 1, 0, 1).finished());
  const auto t = single_plane(3);
  // Hand computation: R_{e1} X = e0 / sqrt 2, lambda X = (e0 + e2) / (2 sqrt 2).
  EXPECT_NEAR(duality_residual(t, x, basis_vector(3, 1), 0.5), 0.5, 1e-15);
  const SphereSample one{3, 0, {x}, {}};
  const auto r = duality_report(t, one);
  EXPECT_NEAR(r.max_residual, 0.5, 1e-14);
  EXPECT_NEAR(r.records[r.witness].eigenvalue, 0.5, 1e-14);
  EXPECT_FALSE(r.verdict);
}

TEST(DualityReport, SkipsTheTrivialPair) {
  const Vector x = unit((Vector(3) << 1, 0, 1).finished());
  const auto r = duality_report(single_plane(3), SphereSample{3, 0, {x}, {}});
  for (const auto& rec : r.records) EXPECT_LE(std::abs(rec.eigenvector.dot(x)), 1e-12);
}

TEST(DualityReport, ComplexSpaceForm) {
  const auto r = duality_report(complex_space_form(4, 1, 1), sample_unit_sphere(4, 50, 1));
  EXPECT_LE(r.max_residual, 1e-9);
}

TEST(DualityReport, RecordsReproduceFromPublicPieces) {
  const auto t = random_curvature(4, 3);
  const auto r = duality_report(t, sample_unit_sphere(4, 10, 2));
  for (const auto& rec : r.records) EXPECT_EQ(rec.residual, duality_residual(t, rec.base, rec.eigenvector, rec.eigenvalue));
}

TEST(BranchDerivative, ConstantCurvatureDoubleBranch) {
  const auto t = constant_curvature(3, 1.0);
  const Vector x = basis_vector(3, 0), y = basis_vector(3, 2);
  const auto p = jacobi_profile(t, x);
  ASSERT_EQ(p.multiplicities, (std::vector<int>{1, 2}));
  // The lambda = 1 cluster is double; the first-order matrix carries its slopes.
  EXPECT_THROW(branch_derivative(t, x, y, 1), BranchError);
  EXPECT_EQ(2.0 * jacobi_form(t, x, y, basis_vector(3, 1), basis_vector(3, 1)), 0.0);
  EXPECT_LE(degenerate_branch_matrix(t, x, y, p.cluster_basis(1)).cwiseAbs().maxCoeff(), 1e-15);
  const auto d = branch_derivative(t, x, y, 0);
  EXPECT_NEAR(d.fd_value, 0.0, 1e-10);
  EXPECT_EQ(d.analytic_value, 0.0);
}

TEST(BranchDerivative, SinglePlaneCosineSquaredBranch) {
  const auto t = single_plane(3);
  const Vector x = basis_vector(3, 0), y = basis_vector(3, 2);
  const auto p = jacobi_profile(t, x);
  ASSERT_EQ(p.multiplicities, (std::vector<int>{2, 1}));
  const auto d = branch_derivative(t, x, y, 1, 1e-3);
  EXPECT_NEAR(d.eigenvalue, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(d.eigenvector[1]), 1.0, 1e-15);
  EXPECT_NEAR(d.fd_value, 0.0, 1e-12);
  EXPECT_EQ(d.analytic_value, 0.0);
}

TEST(BranchDerivative, RandomTensorMatchesFiniteDifference) {
  const auto t = random_curvature(4, 5);
  Rng rng = make_rng(5);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = random_unit(4, rng);
    const Vector y = random_orthogonal_direction(x, rng);
    const auto p = jacobi_profile(t, x);
    for (std::size_t c = 0; c < p.cluster_count(); ++c) {
      const auto d = branch_derivative(t, x, y, c, 1e-4);
      EXPECT_LE(std::abs(d.fd_value - d.analytic_value), 1e-5);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 40);
}

TEST(BranchDerivative, Preconditions) {
  const auto t = random_curvature(3, 1);
  const Vector x = basis_vector(3, 0);
  EXPECT_THROW(branch_derivative(t, x, unit((Vector(3) << 1, 1, 0).finished()), 0), Error);
  EXPECT_THROW(branch_derivative(t, x, basis_vector(3, 1), 0, 0.0), Error);
  EXPECT_THROW(branch_derivative(t, x, basis_vector(3, 1), 0, 0.1), Error);
  EXPECT_THROW(branch_derivative(t, x, basis_vector(3, 1), 7), Error);
  EXPECT_THROW(branch_derivative(t, 2.0 * x, basis_vector(3, 1), 0), Error);
}

TEST(BranchDerivative, DetectsCrossingInsideStep) {
  // Jacobi operator of g.diag(1, 0, d) along cos(phi) e0 + sin(phi) e1 has the
  // constant eigenvalue 1 and the branch d + cos^2 phi, which cross at sin^2 phi = d.
  const double h = 1e-2;
  const double d = std::pow(std::sin(h / 2), 2);
  const auto t = metric_product((Vector(3) << 1, 0, d).finished().asDiagonal().toDenseMatrix());
  const Vector x = basis_vector(3, 0), y = basis_vector(3, 1);
  const auto p = jacobi_profile(t, x);
  ASSERT_EQ(p.multiplicities, (std::vector<int>{1, 1, 1}));
  ASSERT_TRUE(p.regular);
  EXPECT_THROW(branch_derivative(t, x, y, 1, h), BranchError);
  EXPECT_THROW(branch_derivative(t, x, y, 2, h), BranchError);
  EXPECT_NO_THROW(branch_derivative(t, x, y, 2, h / 10));
}

TEST(DegenerateBranchMatrix, ConstantCurvatureVanishes) {
  const auto t = constant_curvature(4, 1.0);
  const Vector x = basis_vector(4, 0), y = basis_vector(4, 1);
  const auto p = jacobi_profile(t, x);
  ASSERT_EQ(p.multiplicities, (std::vector<int>{1, 3}));
  const Matrix m = degenerate_branch_matrix(t, x, y, p.cluster_basis(1));
  EXPECT_EQ(m.rows(), 3);
  EXPECT_LE(m.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DegenerateBranchMatrix, ComplexSpaceFormSlopesVanish) {
  const auto t = complex_space_form(4, 1, 1, 6);
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_unit(4, rng);
    const Vector y = random_orthogonal_direction(x, rng);
    const auto p = jacobi_profile(t, x);
    ASSERT_EQ(p.multiplicities[1], 2);
    EXPECT_LE(branch_slopes(t, x, y, p.cluster_basis(1)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(DegenerateBranchMatrix, SlopesMatchTrackedBranches) {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = random_unit(4, rng);
    const auto t = testing::degenerate_at(random_curvature(4, 11), x);
    const auto p = jacobi_profile(t, x);
    std::size_t c = 0;
    while (c < p.cluster_count() && p.multiplicities[c] != 2) ++c;
    ASSERT_LT(c, p.cluster_count());
    const Vector y = random_orthogonal_direction(x, rng);
    const Vector slopes = branch_slopes(t, x, y, p.cluster_basis(c));
    const Vector fd = fd_branch_slopes(t, x, y, p.cluster_start[c], 2, 1e-5);
    EXPECT_LE((slopes - fd).cwiseAbs().maxCoeff(), 1e-4) << slopes.transpose() << " vs " << fd.transpose();
  }
}

TEST(DegenerateBranchMatrix, ReducesToAnalyticValueForSimpleBranches) {
  const auto t = random_curvature(5, 8);
  Rng rng = make_rng(8);
  const Vector x = random_unit(5, rng);
  const Vector y = random_orthogonal_direction(x, rng);
  const auto p = jacobi_profile(t, x);
  for (std::size_t c = 0; c < p.cluster_count(); ++c) {
    const auto d = branch_derivative(t, x, y, c);
    EXPECT_NEAR(degenerate_branch_matrix(t, x, y, p.cluster_basis(c))(0, 0), d.analytic_value, 1e-12);
  }
}

TEST(DegenerateBranchMatrix, RejectsNonOrthonormalBasis) {
  const auto t = constant_curvature(3, 1.0);
  Matrix basis(3, 2);
  basis << 0, 0, 1, 1, 0, 0;
  EXPECT_THROW(degenerate_branch_matrix(t, basis_vector(3, 0), basis_vector(3, 2), basis), Error);
}

TEST(Properties, OssermanImpliesDuality) {
  for (const auto& t : osserman_corpus()) {
    const auto s = sample_unit_sphere(t.dim(), 100, 13);
    ASSERT_TRUE(osserman_report(t, s, -1.0, 1e-9).verdict);
    EXPECT_LE(duality_report(t, s).max_residual, 1e-8);
  }
}

TEST(Properties, DualityForcesVanishingSlopes) {
  for (const auto& t : osserman_corpus()) {
    const int n = t.dim();
    ASSERT_LE(duality_report(t, sample_unit_sphere(n, 50, 14)).max_residual, 1e-10);
    Rng rng = make_rng(14, static_cast<std::uint64_t>(n));
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = random_unit(n, rng);
      const Vector y = random_orthogonal_direction(x, rng);
      const auto p = jacobi_profile(t, x);
      for (std::size_t c = 0; c < p.cluster_count(); ++c) {
        if (p.multiplicities[c] != 1) continue;
        const Vector e = p.cluster_basis(c).col(0);
        ASSERT_LE(std::abs(2.0 * jacobi_form(t, x, y, e, e)), 1e-8);
      }
    }
  }
}

TEST(Properties, DerivativeIdentityOnRandomTensors) {
  for (int n = 3; n <= 5; ++n) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto t = random_curvature(n, 100 + seed);
      for (double h : {1e-3, 1e-4}) {
        const auto r = derivative_report(t, sample_unit_sphere(n, 10, seed), h);
        EXPECT_TRUE(r.verdict) << "n=" << n << " h=" << h << " diff=" << r.max_difference;
        EXPECT_LE(r.rejections * 20, r.attempts);
      }
    }
  }
}

TEST(Properties, ScaleEquivariance) {
  const auto t = random_curvature(4, 21);
  const auto s = sample_unit_sphere(4, 60, 21);
  const double base = osserman_report(t, s).profile_spread;
  const double residual = duality_report(t, s).max_residual;
  for (double c : {3.0, 0.25, -2.0}) {
    EXPECT_NEAR(osserman_report(c * t, s).profile_spread, std::abs(c) * base, 1e-10 * std::abs(c) * base);
  }
  for (double c : {3.0, 0.25}) {
    const auto scaled = duality_report(c * t, s, -1.0, c * 0.9 * residual);
    EXPECT_EQ(scaled.verdict, duality_report(t, s, -1.0, 0.9 * residual).verdict);
    EXPECT_NEAR(scaled.max_residual, c * residual, 1e-10 * c * residual);
  }
}

TEST(Properties, OrthogonalInvariance) {
  Rng rng = make_rng(22);
  for (const auto& t : {random_curvature(4, 22), random_curvature(5, 23), complex_space_form(4, 1, 1)}) {
    const int n = t.dim();
    const Matrix q = random_orthogonal(n, rng);
    const auto rotated = rotate(t, q);
    auto s = sample_unit_sphere(n, 60, 22);
    SphereSample moved = s;
    for (auto& p : moved.points) p = q * p;
    EXPECT_NEAR(osserman_report(rotated, moved).profile_spread, osserman_report(t, s).profile_spread, 1e-9);
    EXPECT_NEAR(duality_report(rotated, moved).max_residual, duality_report(t, s).max_residual, 1e-9);
  }
}

TEST(Properties, ReportsIndependentOfThreadCount) {
  const auto t = random_curvature(5, 30);
  const auto s = sample_unit_sphere(5, 40, 30);
  const auto a = osserman_report(t, s, -1.0, kDefaultTolerance, 1);
  const auto b = osserman_report(t, s, -1.0, kDefaultTolerance, 3);
  EXPECT_EQ(a.profile_spread, b.profile_spread);
  EXPECT_EQ(a.coeff_spread, b.coeff_spread);
  const auto da = duality_report(t, s, -1.0, kDefaultTolerance, 4, 1);
  const auto db = duality_report(t, s, -1.0, kDefaultTolerance, 4, 4);
  ASSERT_EQ(da.records.size(), db.records.size());
  for (std::size_t i = 0; i < da.records.size(); ++i) EXPECT_EQ(da.records[i].residual, db.records[i].residual);
}

}  // namespace
}  // namespace curvlab
