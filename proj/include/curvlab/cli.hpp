#pragma once

// Command-line front end. Exit codes: 0 pass (or success), 2 verdict fail,
// 1 usage or runtime error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curvlab/corpus.hpp"
#include "curvlab/experiments.hpp"
#include "curvlab/generators.hpp"
#include "curvlab/reports.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/tensor_io.hpp"

namespace curvlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

struct CheckFlags {
  std::string input;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double cluster_tol = -1.0;
  double tolerance = kDefaultTolerance;
  int probes = kDefaultProbes;
  double step = kDefaultStep;
  bool project = false;
  std::string out;
  std::string csv;
};

struct GenFlags {
  std::string type = "constant";
  int n = 3;
  double lambda = 1.0;
  double lambda0 = 1.0;
  double lambda1 = 1.0;
  int m = 1;
  std::vector<double> lambdas;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::string out;
  std::string corpus;
  std::string out_dir;
};

struct ExperimentFlags {
  std::string config;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::string out;
  std::string csv;
};

struct FalsifyFlags {
  FalsifierOptions options;
  std::string method = "random-restart";
  std::string out;
  std::string csv;
};

inline const char* verdict_word(bool pass) { return pass ? "PASS" : "FAIL"; }

inline TensorDescriptor gen_descriptor(const GenFlags& g) {
  TensorDescriptor d{g.type, g.n, nlohmann::json::object(), g.seed};
  if (g.type == "constant") {
    d.params["lambda"] = g.lambda;
  } else if (g.type == "complex") {
    d.params = {{"lambda0", g.lambda0}, {"lambda1", g.lambda1}};
  } else if (g.type == "clifford") {
    d.params = {{"m", g.m}, {"lambda0", g.lambda0}};
    d.params["lambdas"] = g.lambdas.empty() ? std::vector<double>(static_cast<std::size_t>(g.m), g.lambda1) : g.lambdas;
  } else if (g.type == "random") {
    d.params["scale"] = g.scale;
  } else if (g.type != "single_plane") {
    throw Error("gen: unknown --type \"" + g.type + "\"");
  }
  return d;
}

inline int run_gen(const GenFlags& g, std::ostream& out) {
  if (!g.corpus.empty()) {
    if (g.out_dir.empty()) throw Error("gen: --corpus requires --out-dir");
    const CorpusSpec spec = corpus_from_json(read_json_file(g.corpus));
    const auto entries = expand(spec);
    std::filesystem::create_directories(g.out_dir);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto path = std::filesystem::path(g.out_dir) / ("tensor_" + std::to_string(i) + ".json");
      save_tensor(resolve(entries[i]), path);
      out << path.string() << "  " << entries[i].id() << "\n";
    }
    return kExitPass;
  }
  if (g.out.empty()) throw Error("gen: output path (-o) required");
  const TensorDescriptor d = gen_descriptor(g);
  const CurvatureTensor t = resolve(d);
  save_tensor(t, g.out);
  out << "wrote " << d.id() << " to " << g.out << " (frobenius norm " << t.frobenius_norm() << ")\n";
  return kExitPass;
}

inline void emit(const std::string& path, const std::string& text) {
  if (!path.empty()) write_text_file(path, text);
}

inline int run_check(const std::string& which, const CheckFlags& f, int threads, std::ostream& out) {
  const CurvatureTensor t = load_tensor(f.input, f.project ? LoadMode::project : LoadMode::validate);
  const SphereSample sample = sample_unit_sphere(t.dim(), f.samples, f.seed);
  const ReportContext ctx{f.input, f.samples, f.seed, f.cluster_tol};
  if (which == "osserman") {
    const auto r = osserman_report(t, sample, f.cluster_tol, f.tolerance, threads);
    emit(f.out, to_json(r, ctx).dump(2) + "\n");
    emit(f.csv, to_csv(r));
    out << "osserman: spread=" << r.profile_spread << " coeff_spread=" << r.coeff_spread
        << " tolerance=" << r.tolerance << " verdict=" << verdict_word(r.verdict) << "\n";
    return r.verdict ? kExitPass : kExitFail;
  }
  if (which == "duality") {
    const auto r = duality_report(t, sample, f.cluster_tol, f.tolerance, f.probes, threads);
    emit(f.out, to_json(r, ctx).dump(2) + "\n");
    emit(f.csv, to_csv(r));
    out << "duality: max_residual=" << r.max_residual << " records=" << r.records.size()
        << " tolerance=" << r.tolerance << " verdict=" << verdict_word(r.verdict) << "\n";
    return r.verdict ? kExitPass : kExitFail;
  }
  const auto r = derivative_report(t, sample, f.step, f.cluster_tol);
  emit(f.out, to_json(r, ctx, f.step).dump(2) + "\n");
  emit(f.csv, to_csv(r));
  out << "derivative: max|fd-analytic|=" << r.max_difference << " bound=" << r.bound
      << " max|analytic|=" << r.max_analytic << " branches=" << r.records.size()
      << " rejected=" << r.rejections << " verdict=" << verdict_word(r.verdict) << "\n";
  return r.verdict ? kExitPass : kExitFail;
}

inline int run_experiment(const ExperimentFlags& f, int threads, std::ostream& out) {
  const nlohmann::json cfg = read_json_file(f.config);
  const CorpusSpec corpus = corpus_from_json(cfg);
  CheckParams params;
  if (cfg.is_object()) {
    params.samples = cfg.value("samples", params.samples);
    params.seed = cfg.value("seed", params.seed);
    params.tolerance = cfg.value("tolerance", params.tolerance);
    params.probes = cfg.value("probes", params.probes);
    if (cfg.contains("cluster_tol") && cfg["cluster_tol"].is_number()) params.cluster_tol = cfg["cluster_tol"];
  }
  if (f.samples) params.samples = *f.samples;
  if (f.seed) params.seed = *f.seed;
  if (f.tolerance) params.tolerance = *f.tolerance;
  params.threads = threads;

  const auto rows = equivalence_experiment(corpus, params);
  emit(f.out, to_json(rows, params).dump(2) + "\n");
  emit(f.csv, to_csv(rows));
  bool pass = true;
  for (const auto& r : rows) {
    pass = pass && r.error.empty() && r.agree;
    out << (r.error.empty() ? (r.agree ? "agree    " : "DISAGREE ") : "ERROR    ") << r.id
        << "  spread=" << r.osserman_spread << " residual=" << r.duality_max_residual;
    if (!r.error.empty()) out << "  (" << r.error << ")";
    out << "\n";
  }
  out << "equivalence: rows=" << rows.size() << " agreement=" << agreement_rate(rows)
      << " verdict=" << verdict_word(pass) << "\n";
  return pass ? kExitPass : kExitFail;
}

inline int run_falsify(FalsifyFlags f, std::ostream& out) {
  f.options.method = parse_search_method(f.method);
  const FalsifierResult r = falsification_search(f.options);
  emit(f.out, to_json(r).dump(2) + "\n");
  emit(f.csv, to_csv(r));
  out << "falsify: best_residual=" << r.best_residual << " spread=" << r.best_spread
      << " feasible=" << (r.feasible ? "yes" : "no") << " evaluations=" << r.evaluations
      << " restarts=" << r.restarts << " final_mu=" << r.final_mu;
  if (r.verified) out << " verified_residual=" << r.verified_residual << " verified_spread=" << r.verified_spread;
  out << " counterexample=" << (r.counterexample ? "yes" : "no") << "\n";
  return r.counterexample ? kExitFail : kExitPass;
}

inline void add_check_options(CLI::App* cmd, CheckFlags& f, bool duality, bool derivative) {
  cmd->add_option("tensor", f.input, "tensor JSON file")->required();
  cmd->add_option("--samples,-k", f.samples, "sphere sample count")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "sample seed")->capture_default_str();
  cmd->add_option("--cluster-tol", f.cluster_tol, "eigenvalue merge threshold; negative = 1e-6 * spectral range")
      ->capture_default_str();
  cmd->add_option("--tol", f.tolerance, "pass tolerance")->capture_default_str();
  if (duality) cmd->add_option("--probes", f.probes, "random probes per eigenspace")->capture_default_str();
  if (derivative) {
    cmd->add_option("--step", f.step, "finite-difference step h")->capture_default_str()->check(CLI::Range(1e-12, 1e-2));
  }
  cmd->add_flag("--project", f.project, "project the input onto curvature symmetries instead of rejecting it");
  cmd->add_option("--out,-o", f.out, "JSON report path");
  cmd->add_option("--csv", f.csv, "CSV output path");
}

/// Runs the tool on an argument list (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"curvlab: Jacobi operators, Osserman and duality checks for algebraic curvature tensors"};
  app.require_subcommand(1);
  int threads = threads_from_env();
  app.add_option("--threads", threads, "worker threads (fallback: CURVLAB_THREADS)")->capture_default_str();

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a tensor file (or a whole corpus)");
  gen_cmd->add_option("--type", gen.type, "constant|complex|clifford|random|single_plane")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "dimension")->capture_default_str()->check(CLI::Range(2, 64));
  gen_cmd->add_option("--lambda", gen.lambda, "constant curvature value")->capture_default_str();
  gen_cmd->add_option("--lambda0", gen.lambda0, "space-form weight (complex, clifford)")->capture_default_str();
  gen_cmd->add_option("--lambda1", gen.lambda1, "complex-structure weight")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "number of Clifford structures (1-3)")->capture_default_str();
  gen_cmd->add_option("--lambdas", gen.lambdas, "per-structure weights (clifford)");
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--scale", gen.scale, "Frobenius norm of random tensors")->capture_default_str();
  gen_cmd->add_option("--out,-o", gen.out, "output tensor file");
  gen_cmd->add_option("--corpus", gen.corpus, "corpus JSON; writes every entry into --out-dir");
  gen_cmd->add_option("--out-dir", gen.out_dir, "directory for --corpus output");

  auto* check_cmd = app.add_subcommand("check", "run a checker on a tensor file");
  check_cmd->require_subcommand(1);
  CheckFlags osserman_flags, duality_flags, derivative_flags;
  auto* osserman_cmd = check_cmd->add_subcommand("osserman", "spectrum constancy over the unit sphere");
  add_check_options(osserman_cmd, osserman_flags, false, false);
  auto* duality_cmd = check_cmd->add_subcommand("duality", "eigenvector duality over the unit sphere");
  add_check_options(duality_cmd, duality_flags, true, false);
  auto* derivative_cmd = check_cmd->add_subcommand("derivative", "finite-difference vs analytic branch slopes");
  add_check_options(derivative_cmd, derivative_flags, false, true);

  auto* experiment_cmd = app.add_subcommand("experiment", "corpus experiments");
  experiment_cmd->require_subcommand(1);
  ExperimentFlags exp;
  auto* equivalence_cmd = experiment_cmd->add_subcommand("equivalence", "run both checkers over a corpus");
  equivalence_cmd->add_option("config", exp.config, "corpus/config JSON")->required();
  equivalence_cmd->add_option("--samples", exp.samples, "override sample count (default 200)");
  equivalence_cmd->add_option("--seed", exp.seed, "override sample seed (default 1)");
  equivalence_cmd->add_option("--tol", exp.tolerance, "override pass tolerance (default 1e-8)");
  equivalence_cmd->add_option("--out,-o", exp.out, "JSON report path");
  equivalence_cmd->add_option("--csv", exp.csv, "CSV output path");

  FalsifyFlags fal;
  auto* falsify_cmd = app.add_subcommand("falsify", "search for duality without the Osserman property");
  falsify_cmd->add_option("--n", fal.options.n, "dimension (3-6)")->capture_default_str()->check(CLI::Range(3, 6));
  falsify_cmd->add_option("--delta", fal.options.delta, "Osserman-spread floor")->capture_default_str();
  falsify_cmd->add_option("--budget", fal.options.budget, "objective evaluations")->capture_default_str()->check(
      CLI::PositiveNumber);
  falsify_cmd->add_option("--seed", fal.options.seed, "master seed")->capture_default_str();
  falsify_cmd->add_option("--method", fal.method, "random-restart|coordinate-descent")->capture_default_str();
  falsify_cmd->add_option("--mu", fal.options.mu, "initial penalty weight")->capture_default_str();
  falsify_cmd->add_option("--inner-samples", fal.options.inner_samples, "sphere points per evaluation")
      ->capture_default_str();
  falsify_cmd->add_option("--verify-samples", fal.options.verify_samples, "sphere points for re-verification")
      ->capture_default_str();
  falsify_cmd->add_option("--restart-length", fal.options.restart_length, "evaluations per restart (0 = budget/20)")
      ->capture_default_str();
  falsify_cmd->add_option("--tol", fal.options.tolerance, "duality tolerance")->capture_default_str();
  falsify_cmd->add_option("--out,-o", fal.out, "JSON report path");
  falsify_cmd->add_option("--csv", fal.csv, "CSV trace path");

  std::vector<std::string> storage(args.begin(), args.end());
  if (storage.empty()) storage.emplace_back("curvlab");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitError;
  }
  if (threads < 1) {
    err << "error: --threads must be positive\n";
    return kExitError;
  }

  try {
    if (*gen_cmd) return run_gen(gen, out);
    if (*osserman_cmd) return run_check("osserman", osserman_flags, threads, out);
    if (*duality_cmd) return run_check("duality", duality_flags, threads, out);
    if (*derivative_cmd) return run_check("derivative", derivative_flags, threads, out);
    if (*equivalence_cmd) return run_experiment(exp, threads, out);
    if (*falsify_cmd) return run_falsify(fal, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << "error: no command\n";
  return kExitError;
}

}  // namespace curvlab::cli
