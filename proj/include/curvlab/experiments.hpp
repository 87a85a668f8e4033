#pragma once

// Corpus-level agreement of the Osserman and duality checkers, and a
// penalty-method search for tensors that satisfy duality without being
// Osserman.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "curvlab/corpus.hpp"
#include "curvlab/generators.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

struct CheckParams {
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double cluster_tol = -1.0;  ///< negative: per-point default
  double tolerance = kDefaultTolerance;
  int probes = kDefaultProbes;
  int threads = 1;
};

struct EquivalenceRow {
  std::string id;
  double osserman_spread = 0.0;
  double duality_max_residual = 0.0;
  bool osserman_verdict = false;
  bool duality_verdict = false;
  bool agree = false;
  std::string error;  ///< non-empty when generation or checking failed for this row
};

inline EquivalenceRow equivalence_row(const std::string& id, const CurvatureTensor& t, const CheckParams& params) {
  EquivalenceRow row;
  row.id = id;
  const SphereSample sample = sample_unit_sphere(t.dim(), params.samples, params.seed);
  const OssermanReport o = osserman_report(t, sample, params.cluster_tol, params.tolerance);
  const DualityReport d = duality_report(t, sample, params.cluster_tol, params.tolerance, params.probes);
  row.osserman_spread = o.profile_spread;
  row.duality_max_residual = d.max_residual;
  row.osserman_verdict = o.verdict;
  row.duality_verdict = d.verdict;
  row.agree = row.osserman_verdict == row.duality_verdict;
  return row;
}

/// One row per (expanded) corpus entry; both checkers see the same sample.
/// A failing entry is recorded with its error and the run continues.
inline std::vector<EquivalenceRow> equivalence_experiment(const CorpusSpec& corpus, const CheckParams& params) {
  const std::vector<TensorDescriptor> entries = expand(corpus);
  std::vector<EquivalenceRow> rows(entries.size());
  parallel_for(entries.size(), params.threads, [&](std::size_t i) {
    try {
      rows[i] = equivalence_row(entries[i].id(), resolve(entries[i]), params);
    } catch (const std::exception& e) {
      rows[i] = EquivalenceRow{};
      rows[i].id = entries[i].id();
      rows[i].error = e.what();
    }
  });
  return rows;
}

inline double agreement_rate(const std::vector<EquivalenceRow>& rows) {
  if (rows.empty()) return 1.0;
  std::size_t agree = 0;
  for (const auto& r : rows)
    if (r.error.empty() && r.agree) ++agree;
  return static_cast<double>(agree) / static_cast<double>(rows.size());
}

enum class SearchMethod { random_restart, coordinate_descent };

inline std::string to_string(SearchMethod m) {
  return m == SearchMethod::random_restart ? "random-restart" : "coordinate-descent";
}

inline SearchMethod parse_search_method(const std::string& s) {
  if (s == "random-restart") return SearchMethod::random_restart;
  if (s == "coordinate-descent") return SearchMethod::coordinate_descent;
  throw Error("unknown search method \"" + s + "\"");
}

struct FalsifierOptions {
  int n = 4;
  double delta = 0.1;  ///< Osserman-spread floor
  std::size_t budget = 10000;
  std::uint64_t seed = 0;
  SearchMethod method = SearchMethod::random_restart;
  double mu = 10.0;                ///< initial penalty weight
  std::size_t inner_samples = 32;  ///< sphere points per objective evaluation
  std::size_t verify_samples = 500;
  double tolerance = kDefaultTolerance;
  int probes = kDefaultProbes;
  double cluster_tol = -1.0;
  std::size_t restart_length = 0;  ///< evaluations per restart; 0 picks budget / 20
};

struct TracePoint {
  std::size_t evaluation = 0;
  std::size_t restart = 0;
  double residual = 0.0;
  double spread = 0.0;
  double mu = 0.0;
};

struct FalsifierResult {
  FalsifierOptions options;
  std::uint64_t sample_seed = 0;  ///< seed of the inner sample the scores refer to
  double best_residual = 0.0;
  double best_spread = 0.0;
  bool feasible = false;  ///< best candidate meets spread >= delta
  CurvatureTensor candidate = CurvatureTensor::zero(2);
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  double final_mu = 0.0;
  std::vector<TracePoint> trace;  ///< every improvement of the reported candidate
  bool verified = false;          ///< candidate re-checked on verify_samples points
  double verified_residual = 0.0;
  double verified_spread = 0.0;
  bool counterexample = false;  ///< verified residual <= tolerance with verified spread >= delta
};

struct FalsifierScores {
  double residual = 0.0;
  double spread = 0.0;
};

/// Duality residual and Osserman spread on a fixed sample; the same numbers
/// the public checkers report.
inline FalsifierScores falsifier_scores(const CurvatureTensor& t, const SphereSample& sample, double cluster_tol,
                                        double tolerance, int probes) {
  return {duality_report(t, sample, cluster_tol, tolerance, probes).max_residual,
          osserman_report(t, sample, cluster_tol, tolerance).profile_spread};
}

/// Orthonormal basis (Frobenius) of the curvature tensors in dimension n,
/// each element stored as a dense component vector.
inline std::vector<std::vector<double>> curvature_basis(int n) {
  std::vector<std::vector<double>> basis;
  RawTensor unit(n);
  for (std::size_t idx = 0; idx < unit.data().size(); ++idx) {
    std::fill(unit.data().begin(), unit.data().end(), 0.0);
    unit.data()[idx] = 1.0;
    std::vector<double> v = project_to_curvature(unit).data();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = frobenius_inner(v, b);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * b[k];
      }
    const double norm = std::sqrt(frobenius_inner(v, v));
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

namespace detail {

inline CurvatureTensor unit_frobenius(const CurvatureTensor& t) {
  const double norm = t.frobenius_norm();
  if (norm == 0.0) throw Error("falsifier: zero tensor");
  return (1.0 / norm) * t;
}

inline CurvatureTensor random_unit_direction(int n, Rng& rng) {
  return unit_frobenius(project_to_curvature(gaussian_raw_tensor(n, rng)));
}

class FalsifierState {
 public:
  explicit FalsifierState(const FalsifierOptions& o)
      : opts_(o), sample_(sample_unit_sphere(o.n, o.inner_samples, o.seed)) {
    result_.options = o;
    result_.sample_seed = o.seed;
    result_.final_mu = o.mu;
  }

  bool exhausted() const { return result_.evaluations >= opts_.budget; }
  double mu() const { return result_.final_mu; }
  void raise_mu() { result_.final_mu *= 10.0; }
  void begin_restart() { ++result_.restarts; }

  double objective(const FalsifierScores& s) const {
    return s.residual + mu() * std::max(0.0, opts_.delta - s.spread);
  }

  FalsifierScores evaluate(const CurvatureTensor& t) {
    const FalsifierScores s = falsifier_scores(t, sample_, opts_.cluster_tol, opts_.tolerance, opts_.probes);
    ++result_.evaluations;
    offer(t, s);
    return s;
  }

  FalsifierResult finish() {
    if (result_.best_residual < 10.0 * opts_.tolerance && result_.evaluations > 0) {
      const SphereSample big = sample_unit_sphere(opts_.n, opts_.verify_samples, opts_.seed + 1);
      const FalsifierScores v = falsifier_scores(result_.candidate, big, opts_.cluster_tol, opts_.tolerance, opts_.probes);
      result_.verified = true;
      result_.verified_residual = v.residual;
      result_.verified_spread = v.spread;
      result_.counterexample = v.residual <= opts_.tolerance && v.spread >= opts_.delta;
    }
    return result_;
  }

 private:
  // Feasible candidates are ranked by residual and always beat infeasible
  // ones; among infeasible candidates the lowest penalized objective wins.
  void offer(const CurvatureTensor& t, const FalsifierScores& s) {
    const bool feasible = s.spread >= opts_.delta;
    bool better = false;
    if (!have_) {
      better = true;
    } else if (feasible != result_.feasible) {
      better = feasible;
    } else if (feasible) {
      better = s.residual < result_.best_residual;
    } else {
      better = objective(s) < objective({result_.best_residual, result_.best_spread});
    }
    if (!better) return;
    have_ = true;
    result_.feasible = feasible;
    result_.best_residual = s.residual;
    result_.best_spread = s.spread;
    result_.candidate = t;
    result_.trace.push_back({result_.evaluations, result_.restarts, s.residual, s.spread, mu()});
  }

  FalsifierOptions opts_;
  SphereSample sample_;
  FalsifierResult result_;
  bool have_ = false;
};

}  // namespace detail

/// Minimizes residual + mu * max(0, delta - spread) over unit-Frobenius
/// curvature tensors within `budget` objective evaluations. mu grows tenfold
/// after any restart whose incumbent violates the spread floor. Deterministic
/// in seed.
inline FalsifierResult falsification_search(const FalsifierOptions& opts) {
  if (opts.n < 3 || opts.n > 6) throw Error("falsifier: n must lie in [3, 6]");
  if (opts.budget < 1) throw Error("falsifier: budget must be at least 1");
  if (opts.delta < 0.0) throw Error("falsifier: delta must be non-negative");
  if (opts.inner_samples < 1) throw Error("falsifier: need at least one inner sample");

  detail::FalsifierState state(opts);
  const std::size_t per_restart = opts.restart_length > 0 ? opts.restart_length : std::max<std::size_t>(1, opts.budget / 20);
  std::vector<CurvatureTensor> basis;
  if (opts.method == SearchMethod::coordinate_descent)
    for (auto& b : curvature_basis(opts.n)) basis.push_back(CurvatureTensor::from_dense(opts.n, std::move(b)));

  for (std::uint64_t restart = 0; !state.exhausted(); ++restart) {
    state.begin_restart();
    Rng rng = make_rng(opts.seed, 0xFA150000ull + restart);
    CurvatureTensor x = detail::random_unit_direction(opts.n, rng);
    FalsifierScores fx = state.evaluate(x);
    std::size_t used = 1;
    auto try_move = [&](const CurvatureTensor& y) {
      const FalsifierScores fy = state.evaluate(y);
      ++used;
      if (state.objective(fy) < state.objective(fx)) {
        x = y;
        fx = fy;
        return true;
      }
      return false;
    };

    if (opts.method == SearchMethod::random_restart) {
      // (1+1) evolution strategy with success-rate step control.
      double sigma = 0.3;
      while (used < per_restart && !state.exhausted()) {
        const CurvatureTensor dir = detail::random_unit_direction(opts.n, rng);
        if (try_move(detail::unit_frobenius(x + sigma * dir))) {
          sigma = std::min(1.0, sigma * 1.5);
        } else {
          sigma = std::max(1e-12, sigma * 0.9);
        }
      }
    } else {
      // Compass search along an orthonormal basis of the curvature subspace.
      double step = 0.3;
      while (used < per_restart && !state.exhausted() && step > 1e-12) {
        bool improved = false;
        for (std::size_t k = 0; k < basis.size() && used < per_restart && !state.exhausted(); ++k) {
          const CurvatureTensor& b = basis[k];
          if (try_move(detail::unit_frobenius(x + step * b))) {
            improved = true;
            continue;
          }
          if (used < per_restart && !state.exhausted() && try_move(detail::unit_frobenius(x - step * b))) {
            improved = true;
          }
        }
        if (!improved) step *= 0.5;
      }
    }
    if (fx.spread < opts.delta) state.raise_mu();
  }
  return state.finish();
}

}  // namespace curvlab
