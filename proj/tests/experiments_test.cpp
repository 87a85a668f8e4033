#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "curvlab/curvlab.hpp"
#include "test_support.hpp"

namespace curvlab {
namespace {

CheckParams small_params() {
  CheckParams p;
  p.samples = 60;
  p.seed = 1;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Splits one CSV line, honouring double quotes.
std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

TEST(Equivalence, OssermanTensorsPassBoth) {
  CorpusSpec spec{{{"constant", 4, {{"lambda", 1.0}}, 0}, {"complex", 4, {{"lambda0", 1.0}, {"lambda1", 1.0}}, 0}}, {}};
  const auto rows = equivalence_experiment(spec, small_params());
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.osserman_verdict);
    EXPECT_TRUE(r.duality_verdict);
    EXPECT_TRUE(r.agree);
  }
  EXPECT_EQ(agreement_rate(rows), 1.0);
}

TEST(Equivalence, SinglePlaneFailsBoth) {
  CheckParams p = small_params();
  p.samples = 200;
  p.seed = 3;
  const auto rows = equivalence_experiment({{{"single_plane", 3, {}, 0}}, {}}, p);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].osserman_verdict);
  EXPECT_FALSE(rows[0].duality_verdict);
  EXPECT_TRUE(rows[0].agree);
  EXPECT_GT(rows[0].osserman_spread, 0.9);
  EXPECT_NEAR(rows[0].duality_max_residual, 0.5, 0.01);
}

TEST(Equivalence, ZeroPerturbationReproducesBase) {
  const TensorDescriptor base{"complex", 4, {{"lambda0", 1.0}, {"lambda1", 2.0}}, 5};
  const auto plain = equivalence_experiment({{base}, {}}, small_params());
  const auto zero = equivalence_experiment({{base}, {0.0}}, small_params());
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0].osserman_spread, plain[0].osserman_spread);
  EXPECT_EQ(zero[0].duality_max_residual, plain[0].duality_max_residual);
  EXPECT_NE(zero[0].id, plain[0].id);
}

TEST(Equivalence, PerturbationBreaksBoth) {
  const auto rows = equivalence_experiment({{{"complex", 4, {}, 0}}, {0.1}}, small_params());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].osserman_verdict);
  EXPECT_FALSE(rows[0].duality_verdict);
  EXPECT_GT(rows[0].duality_max_residual, 1e-3);
}

TEST(Equivalence, BadEntryIsRecordedAndRunContinues) {
  CorpusSpec spec{{{"clifford", 3, {{"m", 1}}, 0}, {"constant", 3, {}, 0}, {"nonsense", 3, {}, 0}}, {}};
  const auto rows = equivalence_experiment(spec, small_params());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_TRUE(rows[1].error.empty());
  EXPECT_TRUE(rows[1].agree);
  EXPECT_FALSE(rows[2].error.empty());
  EXPECT_DOUBLE_EQ(agreement_rate(rows), 1.0 / 3.0);
}

TEST(Equivalence, ThreadCountDoesNotChangeRows) {
  CorpusSpec spec{{{"random", 4, {}, 1}, {"complex", 4, {}, 2}, {"constant", 5, {}, 0}}, {0.0, 0.05}};
  CheckParams p = small_params();
  const auto a = equivalence_experiment(spec, p);
  p.threads = 4;
  const auto b = equivalence_experiment(spec, p);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].osserman_spread, b[i].osserman_spread);
    EXPECT_EQ(a[i].duality_max_residual, b[i].duality_max_residual);
  }
  EXPECT_EQ(to_csv(a), to_csv(b));
}

FalsifierOptions quick_options() {
  FalsifierOptions o;
  o.n = 3;
  o.budget = 200;
  o.seed = 7;
  o.inner_samples = 16;
  o.verify_samples = 50;
  return o;
}

TEST(Falsifier, BudgetOneReportsTheSeedTensor) {
  FalsifierOptions o = quick_options();
  o.budget = 1;
  const auto r = falsification_search(o);
  EXPECT_EQ(r.evaluations, 1u);
  Rng rng = make_rng(o.seed, 0xFA150000ull);
  const auto seed_tensor = detail::random_unit_direction(o.n, rng);
  EXPECT_EQ(r.candidate, seed_tensor);
  const auto sample = sample_unit_sphere(o.n, o.inner_samples, o.seed);
  EXPECT_EQ(r.best_residual, duality_report(seed_tensor, sample).max_residual);
  EXPECT_EQ(r.best_spread, osserman_report(seed_tensor, sample).profile_spread);
}

TEST(Falsifier, Deterministic) {
  for (auto method : {SearchMethod::random_restart, SearchMethod::coordinate_descent}) {
    FalsifierOptions o = quick_options();
    o.method = method;
    const auto a = falsification_search(o), b = falsification_search(o);
    EXPECT_EQ(a.best_residual, b.best_residual);
    EXPECT_EQ(a.candidate, b.candidate);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  }
}

TEST(Falsifier, ReportedScoresAreSound) {
  for (auto method : {SearchMethod::random_restart, SearchMethod::coordinate_descent}) {
    FalsifierOptions o = quick_options();
    o.method = method;
    const auto r = falsification_search(o);
    EXPECT_LE(r.evaluations, o.budget);
    EXPECT_NEAR(r.candidate.frobenius_norm(), 1.0, 1e-12);
    for (const auto& v : symmetry_violations(r.candidate.dim(), r.candidate.data())) EXPECT_LE(v.max_violation, 1e-12);
    const auto sample = sample_unit_sphere(o.n, o.inner_samples, r.sample_seed);
    EXPECT_NEAR(duality_report(r.candidate, sample).max_residual, r.best_residual, 1e-10);
    EXPECT_NEAR(osserman_report(r.candidate, sample).profile_spread, r.best_spread, 1e-10);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i].evaluation, r.trace[i - 1].evaluation);
  }
}

TEST(Falsifier, FindsOssermanTensorWithoutSpreadFloor) {
  // Without a spread floor the search is plain residual minimization, which
  // converges toward an Osserman tensor. Seed 0 approaches slowly (about 2e-5
  // within budget), seed 1 reaches the 1e-13 range.
  double best = 1e300;
  for (std::uint64_t seed : {0, 1}) {
    FalsifierOptions o;
    o.n = 4;
    o.delta = 0.0;
    o.budget = 10000;
    o.restart_length = 10000;
    o.seed = seed;
    o.method = SearchMethod::coordinate_descent;
    const auto r = falsification_search(o);
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(r.best_residual, 1e-4) << "seed " << seed;
    best = std::min(best, r.best_residual);
  }
  EXPECT_LE(best, 1e-6);
}

TEST(Falsifier, RejectsBadOptions) {
  FalsifierOptions o = quick_options();
  o.n = 2;
  EXPECT_THROW(falsification_search(o), Error);
  o = quick_options();
  o.budget = 0;
  EXPECT_THROW(falsification_search(o), Error);
  o = quick_options();
  o.delta = -1;
  EXPECT_THROW(falsification_search(o), Error);
  EXPECT_THROW(parse_search_method("annealing"), Error);
  EXPECT_EQ(parse_search_method("coordinate-descent"), SearchMethod::coordinate_descent);
}

TEST(CurvatureBasis, OrthonormalAndComplete) {
  for (int n = 2; n <= 4; ++n) {
    const auto basis = curvature_basis(n);
    // n^2 (n^2 - 1) / 12 algebraic curvature tensors.
    EXPECT_EQ(basis.size(), static_cast<std::size_t>(n * n * (n * n - 1) / 12));
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b)
        EXPECT_NEAR(frobenius_inner(basis[a], basis[b]), a == b ? 1.0 : 0.0, 1e-12);
  }
}

TEST(WriteReport, EmptyRowsGiveHeaderOnly) {
  const auto dir = testing::temp_dir("empty_rows");
  write_report(std::vector<EquivalenceRow>{}, dir / "r.csv", ReportFormat::csv, small_params());
  EXPECT_EQ(slurp(dir / "r.csv"), "id,osserman_spread,duality_max_residual,osserman_verdict,duality_verdict,agree\n");
}

TEST(WriteReport, OneRowCsvAndJson) {
  const auto dir = testing::temp_dir("one_row");
  const auto rows = equivalence_experiment({{{"complex", 4, {}, 0}}, {}}, small_params());
  write_report(rows, dir / "r.csv", ReportFormat::csv, small_params());
  const std::string csv = slurp(dir / "r.csv");
  std::istringstream lines(csv);
  std::string header, line, extra;
  std::getline(lines, header);
  std::getline(lines, line);
  EXPECT_FALSE(std::getline(lines, extra));
  const auto fields = csv_fields(line);
  ASSERT_EQ(fields.size(), 6u);
  EXPECT_EQ(fields[0], rows[0].id);
  EXPECT_EQ(std::stod(fields[2]), rows[0].duality_max_residual);

  write_report(rows, dir / "again.csv", ReportFormat::csv, small_params());
  EXPECT_EQ(slurp(dir / "again.csv"), csv);

  write_report(rows, dir / "r.json", ReportFormat::json, small_params());
  const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(j["check"], "equivalence");
  ASSERT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(j["rows"][0]["duality_max_residual"].get<double>(), rows[0].duality_max_residual);
}

TEST(WriteReport, FalsifierRoundTrip) {
  const auto dir = testing::temp_dir("falsify_report");
  const auto r = falsification_search(quick_options());
  write_report(r, dir / "f.json", ReportFormat::json);
  const auto j = nlohmann::json::parse(slurp(dir / "f.json"));
  EXPECT_EQ(j["check"], "falsify");
  EXPECT_EQ(j["max_residual"].get<double>(), r.best_residual);
  write_report(r, dir / "f.csv", ReportFormat::csv);
  EXPECT_EQ(slurp(dir / "f.csv").rfind("evaluation,restart,residual,spread,mu\n", 0), 0u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}

}  // namespace
}  // namespace curvlab
