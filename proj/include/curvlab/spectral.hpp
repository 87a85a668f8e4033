#pragma once

// Spectral analysis of Jacobi operators over the unit sphere.
//
// Eigenvalues within cluster_tol of their neighbour are merged into one
// cluster. A point is regular when every gap between clusters exceeds
// kRegularGapFactor * cluster_tol; this stands in for the open dense set on
// which eigenvalue count and multiplicities are locally constant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "curvlab/error.hpp"
#include "curvlab/generators.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

inline constexpr double kRelativeClusterTol = 1e-6;
inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr double kRegularGapFactor = 10.0;
inline constexpr double kDefaultStep = 1e-4;
inline constexpr double kBranchOverlap = 0.9;
inline constexpr int kDefaultProbes = 4;

struct SpectralProfile {
  std::vector<double> eigenvalues;  ///< cluster means, strictly increasing
  std::vector<int> multiplicities;
  double cluster_tol = 0.0;
  std::vector<double> charpoly;  ///< det(tI - M), highest degree first; charpoly[0] == 1
  Vector spectrum;               ///< every eigenvalue, ascending
  Matrix eigenvectors;           ///< column c belongs to spectrum[c]
  std::vector<int> cluster_start;
  bool regular = true;

  std::size_t cluster_count() const { return eigenvalues.size(); }

  /// Orthonormal eigenbasis (n x multiplicity) of cluster c.
  Matrix cluster_basis(std::size_t c) const {
    return eigenvectors.middleCols(cluster_start.at(c), multiplicities.at(c));
  }
};

/// Coefficients of prod_i (t - roots_i), highest degree first.
inline std::vector<double> charpoly_from_roots(const Vector& roots) {
  std::vector<double> c{1.0};
  for (Eigen::Index r = 0; r < roots.size(); ++r) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k];
      next[k + 1] -= roots[r] * c[k];
    }
    c = std::move(next);
  }
  return c;
}

/// 1e-6 times the spectral range.
inline double default_cluster_tol(const Vector& sorted_eigenvalues) {
  if (sorted_eigenvalues.size() == 0) return 0.0;
  return kRelativeClusterTol * (sorted_eigenvalues[sorted_eigenvalues.size() - 1] - sorted_eigenvalues[0]);
}

/// Full eigendecomposition plus clustering. A negative cluster_tol selects
/// default_cluster_tol.
inline SpectralProfile spectral_profile(const Matrix& m, double cluster_tol = -1.0) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_profile: matrix must be square");
  if (!m.allFinite()) throw NonFiniteError("spectral_profile: non-finite matrix entry");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw EigenSolverError("symmetric eigensolver did not converge");

  SpectralProfile p;
  p.spectrum = es.eigenvalues();
  p.eigenvectors = es.eigenvectors();
  p.cluster_tol = cluster_tol < 0.0 ? default_cluster_tol(p.spectrum) : cluster_tol;
  p.charpoly = charpoly_from_roots(p.spectrum);

  const auto n = static_cast<int>(p.spectrum.size());
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || p.spectrum[i] - p.spectrum[i - 1] > p.cluster_tol) {
      if (i < n && p.spectrum[i] - p.spectrum[i - 1] <= kRegularGapFactor * p.cluster_tol) p.regular = false;
      p.cluster_start.push_back(start);
      p.multiplicities.push_back(i - start);
      p.eigenvalues.push_back(p.spectrum.segment(start, i - start).mean());
      start = i;
    }
  }
  return p;
}

inline SpectralProfile spectral_profile(const JacobiOperator& j, double cluster_tol = -1.0) {
  return spectral_profile(j.matrix, cluster_tol);
}

struct SphereSample {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<Vector> points;
  std::vector<bool> regular_flags;  ///< empty until flag_regular runs
};

/// K normalized standard Gaussian vectors, deterministic in seed.
inline SphereSample sample_unit_sphere(int n, std::size_t count, std::uint64_t seed) {
  if (n < 1) throw DimensionError("sample_unit_sphere: n must be positive");
  if (count < 1) throw Error("sample_unit_sphere: need at least one point");
  SphereSample s{n, seed, {}, {}};
  Rng rng = make_rng(seed, 0x5EED);
  s.points.reserve(count);
  while (s.points.size() < count) {
    Vector v = gaussian_vector(n, rng);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    s.points.push_back(v / norm);
  }
  return s;
}

namespace detail {

inline void require_sample(const CurvatureTensor& t, const SphereSample& s) {
  if (s.n != t.dim()) {
    throw DimensionError("sample dimension " + std::to_string(s.n) + " does not match tensor dimension " +
                         std::to_string(t.dim()));
  }
  if (s.points.empty()) throw Error("empty sphere sample");
}

}  // namespace detail

inline SpectralProfile jacobi_profile(const CurvatureTensor& t, const Vector& x, double cluster_tol = -1.0) {
  return spectral_profile(jacobi_operator(t, x), cluster_tol);
}

inline void flag_regular(const CurvatureTensor& t, SphereSample& s, double cluster_tol = -1.0) {
  detail::require_sample(t, s);
  s.regular_flags.assign(s.points.size(), false);
  for (std::size_t i = 0; i < s.points.size(); ++i)
    s.regular_flags[i] = jacobi_profile(t, s.points[i], cluster_tol).regular;
}

struct OssermanReport {
  double profile_spread = 0.0;
  double coeff_spread = 0.0;
  double tolerance = kDefaultTolerance;
  bool verdict = true;
  std::size_t witness_first = 0;   ///< sample index with the largest entry at the worst position
  std::size_t witness_second = 0;  ///< sample index with the smallest entry there
  Vector witness_x;
  Vector witness_y;
  std::vector<Vector> spectra;  ///< sorted eigenvalues per sample
  std::vector<std::vector<double>> charpolys;
  std::vector<bool> regular_flags;
};

/// Spread of sorted-with-multiplicity Jacobi spectra (and of the
/// characteristic polynomial coefficients) over the sample.
inline OssermanReport osserman_report(const CurvatureTensor& t, const SphereSample& sample,
                                      double cluster_tol = -1.0, double tolerance = kDefaultTolerance,
                                      int threads = 1) {
  detail::require_sample(t, sample);
  const std::size_t count = sample.points.size();
  std::vector<SpectralProfile> profiles(count);
  parallel_for(count, threads, [&](std::size_t i) { profiles[i] = jacobi_profile(t, sample.points[i], cluster_tol); });

  OssermanReport r;
  r.tolerance = tolerance;
  const int n = t.dim();
  for (const auto& p : profiles) {
    r.spectra.push_back(p.spectrum);
    r.charpolys.push_back(p.charpoly);
    r.regular_flags.push_back(p.regular);
  }

  for (int k = 0; k < n; ++k) {
    std::size_t hi = 0, lo = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (r.spectra[i][k] > r.spectra[hi][k]) hi = i;
      if (r.spectra[i][k] < r.spectra[lo][k]) lo = i;
    }
    const double d = r.spectra[hi][k] - r.spectra[lo][k];
    if (k == 0 || d > r.profile_spread) {
      r.profile_spread = d;
      r.witness_first = hi;
      r.witness_second = lo;
    }
  }

  std::vector<double> column(count);
  for (int k = 0; k <= n; ++k) {
    for (std::size_t i = 0; i < count; ++i) column[i] = r.charpolys[i][k];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const double median =
        count % 2 == 1 ? sorted[count / 2] : 0.5 * (sorted[count / 2 - 1] + sorted[count / 2]);
    for (double c : column) r.coeff_spread = std::max(r.coeff_spread, std::abs(c - median));
  }

  r.witness_x = sample.points[r.witness_first];
  r.witness_y = sample.points[r.witness_second];
  r.verdict = r.profile_spread <= tolerance;
  return r;
}

struct DualityRecord {
  std::size_t sample = 0;
  Vector base;
  double eigenvalue = 0.0;
  Vector eigenvector;
  double residual = 0.0;
  bool probe = false;  ///< random combination rather than a basis vector
};

struct DualityReport {
  std::vector<DualityRecord> records;
  double max_residual = 0.0;
  double tolerance = kDefaultTolerance;
  bool verdict = true;
  std::size_t witness = 0;  ///< index into records; meaningless when records is empty
};

/// ||R_Y X - lambda X|| for unit Y (renormalized here).
inline double duality_residual(const CurvatureTensor& t, const Vector& x, const Vector& y, double lambda) {
  const Vector yu = y / y.norm();
  return (jacobi_matrix(t, yu) * x - lambda * x).norm();
}

/// Orthonormal basis of (cluster eigenspace) intersected with x^perp. Removes
/// the trivial direction x from the cluster that contains it.
inline Matrix eigenspace_orthogonal_to(const Matrix& basis, const Vector& x) {
  const Vector c = basis.transpose() * x;
  const Matrix gram = Matrix::Identity(basis.cols(), basis.cols()) - c * c.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw EigenSolverError("eigensolver failed on eigenspace restriction");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < gram.cols(); ++i)
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  Matrix out(basis.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    Vector v = basis * es.eigenvectors().col(keep[i]);
    out.col(static_cast<Eigen::Index>(i)) = v / v.norm();
  }
  return out;
}

/// Duality records at a single base point. Probe coefficients come from rng.
inline std::vector<DualityRecord> duality_records_at(const CurvatureTensor& t, const Vector& x,
                                                     std::size_t sample_index, double cluster_tol, int probes,
                                                     Rng& rng) {
  const SpectralProfile p = jacobi_profile(t, x, cluster_tol);
  std::vector<DualityRecord> out;
  for (std::size_t c = 0; c < p.cluster_count(); ++c) {
    const Matrix w = eigenspace_orthogonal_to(p.cluster_basis(c), x);
    const double lambda = p.eigenvalues[c];
    for (Eigen::Index col = 0; col < w.cols(); ++col) {
      const Vector y = w.col(col);
      out.push_back({sample_index, x, lambda, y, duality_residual(t, x, y, lambda), false});
    }
    if (w.cols() < 2) continue;
    for (int k = 0; k < probes; ++k) {
      Vector y = w * gaussian_vector(static_cast<int>(w.cols()), rng);
      y /= y.norm();
      out.push_back({sample_index, x, lambda, y, duality_residual(t, x, y, lambda), true});
    }
  }
  return out;
}

/// For every sample X and eigenvalue cluster lambda of R_X, checks that X is
/// a lambda-eigenvector of R_Y for an orthonormal eigenbasis of the cluster
/// (minus X itself) plus `probes` random unit vectors in it.
inline DualityReport duality_report(const CurvatureTensor& t, const SphereSample& sample,
                                    double cluster_tol = -1.0, double tolerance = kDefaultTolerance,
                                    int probes = kDefaultProbes, int threads = 1) {
  detail::require_sample(t, sample);
  const std::size_t count = sample.points.size();
  std::vector<std::vector<DualityRecord>> per_sample(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = make_rng(sample.seed, 0xD0A1000000ull + i);
    per_sample[i] = duality_records_at(t, sample.points[i], i, cluster_tol, probes, rng);
  });

  DualityReport r;
  r.tolerance = tolerance;
  for (auto& recs : per_sample)
    for (auto& rec : recs) {
      if (r.records.empty() || rec.residual > r.max_residual) {
        r.max_residual = rec.residual;
        r.witness = r.records.size();
      }
      r.records.push_back(std::move(rec));
    }
  r.verdict = r.max_residual <= tolerance;
  return r;
}

/// Matrix of the polarized Jacobi form: P(a, b) = jacobi_form(x, y, e_a, e_b).
inline Matrix polarized_jacobi_matrix(const CurvatureTensor& t, const Vector& x, const Vector& y) {
  detail::require_dim(t, x, "polarized_jacobi_matrix");
  detail::require_dim(t, y, "polarized_jacobi_matrix");
  const int n = t.dim();
  const double* c = t.data().data();
  Matrix m = Matrix::Zero(n, n);
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double w = 0.5 * (x[j] * y[k] + y[j] * x[k]);
        for (int b = 0; b < n; ++b) m(a, b) += w * c[idx++];
      }
  return 0.5 * (m + m.transpose());
}

struct BranchDerivative {
  Vector base;
  Vector direction;
  std::size_t cluster = 0;
  double eigenvalue = 0.0;
  Vector eigenvector;
  double step = kDefaultStep;
  double fd_value = 0.0;        ///< (lambda(h) - lambda(-h)) / 2h
  double analytic_value = 0.0;  ///< 2 jacobi_form(X, Y, e0, e0)
};

namespace detail {

inline void require_geodesic_frame(const CurvatureTensor& t, const Vector& x, const Vector& y) {
  require_dim(t, x, "branch derivative");
  require_dim(t, y, "branch derivative");
  if (std::abs(x.norm() - 1.0) > 1e-10 || std::abs(y.norm() - 1.0) > 1e-10) {
    throw Error("branch derivative: X and Y must be unit vectors");
  }
  if (std::abs(x.dot(y)) > 1e-10) throw Error("branch derivative: Y must be orthogonal to X");
}

inline bool isolated(const Vector& spectrum, Eigen::Index pos, double gap) {
  if (pos > 0 && spectrum[pos] - spectrum[pos - 1] <= gap) return false;
  if (pos + 1 < spectrum.size() && spectrum[pos + 1] - spectrum[pos] <= gap) return false;
  return true;
}

}  // namespace detail

/// Central finite difference of a simple eigenvalue branch along the sphere
/// geodesic cos(phi) X + sin(phi) Y, next to its first-order value
/// 2 jacobi_form(X, Y, e0, e0). The e'(0) contribution vanishes identically
/// and is never formed.
inline BranchDerivative branch_derivative(const CurvatureTensor& t, const Vector& x, const Vector& y,
                                          std::size_t cluster, double h = kDefaultStep,
                                          double cluster_tol = -1.0) {
  detail::require_geodesic_frame(t, x, y);
  if (!(h > 0.0 && h <= 1e-2)) throw Error("branch derivative: step must lie in (0, 1e-2]");
  Vector yo = y - x.dot(y) * x;
  yo /= yo.norm();

  const SpectralProfile p0 = jacobi_profile(t, x, cluster_tol);
  if (cluster >= p0.cluster_count()) throw Error("branch derivative: cluster index out of range");
  if (p0.multiplicities[cluster] != 1) {
    throw BranchError("branch derivative: cluster has multiplicity " +
                      std::to_string(p0.multiplicities[cluster]) + "; use degenerate_branch_matrix");
  }
  const Eigen::Index pos = p0.cluster_start[cluster];
  const double gap = kRegularGapFactor * p0.cluster_tol;
  if (!detail::isolated(p0.spectrum, pos, gap)) throw BranchError("branch derivative: base point is irregular");

  BranchDerivative d;
  d.base = x;
  d.direction = yo;
  d.cluster = cluster;
  d.eigenvalue = p0.spectrum[pos];
  d.eigenvector = p0.eigenvectors.col(pos);
  d.step = h;

  double lambda[2];
  const double phis[2] = {h, -h};
  for (int s = 0; s < 2; ++s) {
    const Vector z = std::cos(phis[s]) * x + std::sin(phis[s]) * yo;
    const SpectralProfile ps = spectral_profile(jacobi_matrix(t, z / z.norm()), p0.cluster_tol);
    if (!detail::isolated(ps.spectrum, pos, gap)) throw BranchError("branch derivative: irregular endpoint");
    if (std::abs(ps.eigenvectors.col(pos).dot(d.eigenvector)) <= kBranchOverlap) {
      throw BranchError("branch derivative: eigenvector overlap lost (branch crossing within the step)");
    }
    lambda[s] = ps.spectrum[pos];
  }
  d.fd_value = (lambda[0] - lambda[1]) / (2.0 * h);
  d.analytic_value = 2.0 * jacobi_form(t, x, yo, d.eigenvector, d.eigenvector);
  return d;
}

/// First-order splitting of a (possibly degenerate) eigenvalue cluster along
/// the geodesic from X towards Y: M(i, j) = 2 jacobi_form(X, Y, e_i, e_j) for
/// the given orthonormal eigenbasis. Its eigenvalues are the slopes of the
/// analytic branches leaving the cluster (Rellich).
inline Matrix degenerate_branch_matrix(const CurvatureTensor& t, const Vector& x, const Vector& y,
                                       const Matrix& basis) {
  detail::require_geodesic_frame(t, x, y);
  if (basis.rows() != t.dim() || basis.cols() < 1) throw DimensionError("degenerate_branch_matrix: basis shape");
  const auto m = basis.cols();
  if ((basis.transpose() * basis - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error("degenerate_branch_matrix: basis is not orthonormal");
  }
  const Matrix b = 2.0 * basis.transpose() * polarized_jacobi_matrix(t, x, y) * basis;
  return 0.5 * (b + b.transpose());
}

/// Sorted eigenvalues of degenerate_branch_matrix.
inline Vector branch_slopes(const CurvatureTensor& t, const Vector& x, const Vector& y, const Matrix& basis) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(degenerate_branch_matrix(t, x, y, basis), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenSolverError("eigensolver failed on branch matrix");
  return es.eigenvalues();
}

/// Unit vector orthogonal to x drawn from rng.
inline Vector random_orthogonal_direction(const Vector& x, Rng& rng) {
  for (;;) {
    Vector y = gaussian_vector(static_cast<int>(x.size()), rng);
    y -= x.dot(y) * x;
    const double norm = y.norm();
    if (norm > 1e-6) {
      y /= norm;
      y -= x.dot(y) * x;
      return y / y.norm();
    }
  }
}

struct DerivativeReport {
  std::vector<BranchDerivative> records;
  std::vector<std::size_t> record_sample;  ///< sample index of each record
  std::size_t attempts = 0;
  std::size_t rejections = 0;  ///< simple branches refused as crossing or irregular
  double max_difference = 0.0;
  double max_analytic = 0.0;
  double bound = 0.0;  ///< 10 ||t|| h
  bool verdict = true;
  std::size_t witness = 0;
};

/// Branch derivatives of every simple cluster at each sample point, along a
/// random orthogonal direction per point. Verdict: |fd - analytic| <= 10 ||t|| h
/// for every tracked branch.
inline DerivativeReport derivative_report(const CurvatureTensor& t, const SphereSample& sample,
                                          double h = kDefaultStep, double cluster_tol = -1.0) {
  detail::require_sample(t, sample);
  DerivativeReport r;
  r.bound = 10.0 * t.frobenius_norm() * h;
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const Vector& x = sample.points[i];
    Rng rng = make_rng(sample.seed, 0xB4A0000000ull + i);
    const Vector y = random_orthogonal_direction(x, rng);
    const SpectralProfile p = jacobi_profile(t, x, cluster_tol);
    for (std::size_t c = 0; c < p.cluster_count(); ++c) {
      if (p.multiplicities[c] != 1) continue;
      ++r.attempts;
      try {
        r.records.push_back(branch_derivative(t, x, y, c, h, cluster_tol));
      } catch (const BranchError&) {
        ++r.rejections;
        continue;
      }
      r.record_sample.push_back(i);
      const auto& b = r.records.back();
      const double diff = std::abs(b.fd_value - b.analytic_value);
      if (diff > r.max_difference) {
        r.max_difference = diff;
        r.witness = r.records.size() - 1;
      }
      r.max_analytic = std::max(r.max_analytic, std::abs(b.analytic_value));
    }
  }
  r.verdict = r.max_difference <= r.bound;
  return r;
}

}  // namespace curvlab
