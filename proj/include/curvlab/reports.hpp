#pragma once

// Machine-readable reports.
//
// JSON: {"check": "osserman"|"duality"|"derivative"|"equivalence"|"falsify",
//        "tensor": <source>, "samples": K, "seed": s, ..., "verdict": bool, "witness": {...}}
//
// CSV columns:
//   osserman     sample,regular,lambda_0,...,lambda_{n-1}
//   duality      sample,eigenvalue,residual,probe
//   derivative   sample,cluster,eigenvalue,fd_value,analytic_value,abs_difference
//   equivalence  id,osserman_spread,duality_max_residual,osserman_verdict,duality_verdict,agree
//   falsify      evaluation,restart,residual,spread,mu
//
// Doubles are written in shortest round-trip form, so equal inputs give
// byte-identical files.

#include <charconv>
#include <filesystem>
#include <string>
#include <vector>

#include "curvlab/experiments.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/tensor_io.hpp"
#include "json.hpp"

namespace curvlab {

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw Error("unknown report format \"" + s + "\"");
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct ReportContext {
  std::string tensor;  ///< source path or generator description
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double cluster_tol = -1.0;
};

namespace detail {

inline nlohmann::json header(const char* check, const ReportContext& ctx) {
  nlohmann::json j{{"check", check}, {"tensor", ctx.tensor}, {"samples", ctx.samples}, {"seed", ctx.seed}};
  j["cluster_tol"] = ctx.cluster_tol < 0.0 ? nlohmann::json("auto") : nlohmann::json(ctx.cluster_tol);
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const OssermanReport& r, const ReportContext& ctx) {
  auto j = detail::header("osserman", ctx);
  j["spread"] = r.profile_spread;
  j["coeff_spread"] = r.coeff_spread;
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.verdict;
  std::size_t regular = 0;
  for (bool b : r.regular_flags) regular += b ? 1 : 0;
  j["regular_points"] = regular;
  j["witness"] = {{"x", vector_json(r.witness_x)},
                  {"y", vector_json(r.witness_y)},
                  {"spectrum_x", vector_json(r.spectra.at(r.witness_first))},
                  {"spectrum_y", vector_json(r.spectra.at(r.witness_second))}};
  return j;
}

inline std::string to_csv(const OssermanReport& r) {
  std::string out = "sample,regular";
  const std::size_t n = r.spectra.empty() ? 0 : static_cast<std::size_t>(r.spectra.front().size());
  for (std::size_t k = 0; k < n; ++k) out += ",lambda_" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < r.spectra.size(); ++i) {
    out += std::to_string(i) + "," + (r.regular_flags[i] ? "1" : "0");
    for (std::size_t k = 0; k < n; ++k) out += "," + format_double(r.spectra[i][static_cast<Eigen::Index>(k)]);
    out += "\n";
  }
  return out;
}

inline nlohmann::json to_json(const DualityReport& r, const ReportContext& ctx) {
  auto j = detail::header("duality", ctx);
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.verdict;
  j["records"] = r.records.size();
  if (!r.records.empty()) {
    const auto& w = r.records.at(r.witness);
    j["witness"] = {{"sample", w.sample},
                    {"x", vector_json(w.base)},
                    {"eigenvalue", w.eigenvalue},
                    {"y", vector_json(w.eigenvector)},
                    {"residual", w.residual}};
  } else {
    j["witness"] = nlohmann::json::object();
  }
  return j;
}

inline std::string to_csv(const DualityReport& r) {
  std::string out = "sample,eigenvalue,residual,probe\n";
  for (const auto& rec : r.records) {
    out += std::to_string(rec.sample) + "," + format_double(rec.eigenvalue) + "," + format_double(rec.residual) +
           "," + (rec.probe ? "1" : "0") + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const DerivativeReport& r, const ReportContext& ctx, double step) {
  auto j = detail::header("derivative", ctx);
  j["step"] = step;
  j["max_abs_difference"] = r.max_difference;
  j["max_abs_analytic"] = r.max_analytic;
  j["bound"] = r.bound;
  j["attempts"] = r.attempts;
  j["rejections"] = r.rejections;
  j["verdict"] = r.verdict;
  if (!r.records.empty()) {
    const auto& w = r.records.at(r.witness);
    j["witness"] = {{"x", vector_json(w.base)},          {"y", vector_json(w.direction)},
                    {"eigenvalue", w.eigenvalue},        {"fd_value", w.fd_value},
                    {"analytic_value", w.analytic_value}};
  } else {
    j["witness"] = nlohmann::json::object();
  }
  return j;
}

inline std::string to_csv(const DerivativeReport& r) {
  std::string out = "sample,cluster,eigenvalue,fd_value,analytic_value,abs_difference\n";
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& b = r.records[i];
    out += std::to_string(r.record_sample[i]) + "," + std::to_string(b.cluster) + "," + format_double(b.eigenvalue) + "," +
           format_double(b.fd_value) + "," + format_double(b.analytic_value) + "," +
           format_double(std::abs(b.fd_value - b.analytic_value)) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<EquivalenceRow>& rows, const CheckParams& params) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"id", r.id},
                       {"osserman_spread", r.osserman_spread},
                       {"duality_max_residual", r.duality_max_residual},
                       {"osserman_verdict", r.osserman_verdict},
                       {"duality_verdict", r.duality_verdict},
                       {"agree", r.agree}};
    if (!r.error.empty()) row["error"] = r.error;
    list.push_back(std::move(row));
  }
  bool all_agree = true;
  for (const auto& r : rows) all_agree = all_agree && r.error.empty() && r.agree;
  return {{"check", "equivalence"},
          {"samples", params.samples},
          {"seed", params.seed},
          {"tolerance", params.tolerance},
          {"probes", params.probes},
          {"agreement_rate", agreement_rate(rows)},
          {"verdict", all_agree},
          {"rows", std::move(list)}};
}

inline std::string to_csv(const std::vector<EquivalenceRow>& rows) {
  std::string out = "id,osserman_spread,duality_max_residual,osserman_verdict,duality_verdict,agree\n";
  for (const auto& r : rows) {
    out += csv_quote(r.id) + "," + format_double(r.osserman_spread) + "," + format_double(r.duality_max_residual) +
           "," + (r.osserman_verdict ? "1" : "0") + "," + (r.duality_verdict ? "1" : "0") + "," +
           (r.agree ? "1" : "0") + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const FalsifierResult& r) {
  const auto& o = r.options;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"evaluation", t.evaluation}, {"restart", t.restart}, {"residual", t.residual},
                     {"spread", t.spread}, {"mu", t.mu}});
  }
  nlohmann::json j{{"check", "falsify"},
                   {"n", o.n},
                   {"delta", o.delta},
                   {"budget", o.budget},
                   {"seed", o.seed},
                   {"method", to_string(o.method)},
                   {"samples", o.inner_samples},
                   {"sample_seed", r.sample_seed},
                   {"probes", o.probes},
                   {"tolerance", o.tolerance},
                   {"max_residual", r.best_residual},
                   {"spread", r.best_spread},
                   {"feasible", r.feasible},
                   {"evaluations", r.evaluations},
                   {"restarts", r.restarts},
                   {"final_mu", r.final_mu},
                   {"verified", r.verified},
                   {"counterexample", r.counterexample},
                   {"verdict", !r.counterexample},
                   {"candidate", tensor_to_json(r.candidate)},
                   {"trace", std::move(trace)}};
  if (r.verified) {
    j["verified_samples"] = o.verify_samples;
    j["verified_residual"] = r.verified_residual;
    j["verified_spread"] = r.verified_spread;
  }
  return j;
}

inline std::string to_csv(const FalsifierResult& r) {
  std::string out = "evaluation,restart,residual,spread,mu\n";
  for (const auto& t : r.trace) {
    out += std::to_string(t.evaluation) + "," + std::to_string(t.restart) + "," + format_double(t.residual) + "," +
           format_double(t.spread) + "," + format_double(t.mu) + "\n";
  }
  return out;
}

inline void write_report(const std::vector<EquivalenceRow>& rows, const std::filesystem::path& path, ReportFormat format,
                         const CheckParams& params = {}) {
  write_text_file(path, format == ReportFormat::csv ? to_csv(rows) : to_json(rows, params).dump(2) + "\n");
}

inline void write_report(const FalsifierResult& result, const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::csv ? to_csv(result) : to_json(result).dump(2) + "\n");
}

}  // namespace curvlab
