#pragma once

// Corpus descriptors: a JSON-describable recipe for each generated tensor.
//
//   {"kind": "constant"|"complex"|"clifford"|"random"|"perturbed"|"single_plane",
//    "n": 4, "params": {...}, "seed": 0}
//
// params by kind:
//   constant      lambda (1)
//   complex       lambda0 (1), lambda1 (1)
//   clifford      m (1), lambda0 (1), lambdas ([1] * m)
//   random        scale (1)
//   perturbed     base (descriptor), epsilon; noise = random_curvature(n, seed, noise_scale (1))
//   single_plane  (none)

#include <cstdint>
#include <string>
#include <vector>

#include "curvlab/error.hpp"
#include "curvlab/generators.hpp"
#include "json.hpp"

namespace curvlab {

struct TensorDescriptor {
  std::string kind;
  int n = 0;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;

  std::string id() const {
    return kind + ":n=" + std::to_string(n) + ":seed=" + std::to_string(seed) + ":" + params.dump();
  }
};

struct CorpusSpec {
  std::vector<TensorDescriptor> tensors;
  std::vector<double> epsilons;  ///< when non-empty, every descriptor is expanded to one perturbation per scale
};

inline nlohmann::json descriptor_to_json(const TensorDescriptor& d) {
  return {{"kind", d.kind}, {"n", d.n}, {"params", d.params}, {"seed", d.seed}};
}

inline TensorDescriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw IoError("corpus: descriptor must be an object");
  TensorDescriptor d;
  try {
    d.kind = j.at("kind").get<std::string>();
    d.n = j.at("n").get<int>();
    d.params = j.value("params", nlohmann::json::object());
    d.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("corpus: bad descriptor: ") + e.what());
  }
  return d;
}

inline CorpusSpec corpus_from_json(const nlohmann::json& j) {
  CorpusSpec spec;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("corpus")) throw IoError("corpus: missing \"corpus\" array");
    list = &j["corpus"];
    if (j.contains("epsilons")) spec.epsilons = j["epsilons"].get<std::vector<double>>();
  }
  if (!list->is_array()) throw IoError("corpus: expected an array of descriptors");
  for (const auto& d : *list) spec.tensors.push_back(descriptor_from_json(d));
  return spec;
}

inline TensorDescriptor perturbed_descriptor(const TensorDescriptor& base, double eps) {
  return {"perturbed", base.n, {{"base", descriptor_to_json(base)}, {"epsilon", eps}}, base.seed};
}

/// The concrete descriptor list, with epsilon expansion applied.
inline std::vector<TensorDescriptor> expand(const CorpusSpec& spec) {
  if (spec.epsilons.empty()) return spec.tensors;
  std::vector<TensorDescriptor> out;
  for (const auto& d : spec.tensors)
    for (double eps : spec.epsilons) out.push_back(perturbed_descriptor(d, eps));
  return out;
}

inline CurvatureTensor resolve(const TensorDescriptor& d) {
  if (!d.params.is_null() && !d.params.is_object()) throw IoError("corpus: params must be an object");
  const nlohmann::json p = d.params.is_null() ? nlohmann::json::object() : d.params;
  auto num = [&](const char* key, double fallback) { return p.value(key, fallback); };
  if (d.kind == "constant") return constant_curvature(d.n, num("lambda", 1.0));
  if (d.kind == "complex") return complex_space_form(d.n, num("lambda0", 1.0), num("lambda1", 1.0), d.seed);
  if (d.kind == "clifford") {
    const int m = p.value("m", 1);
    std::vector<double> lambdas = p.value("lambdas", std::vector<double>(static_cast<std::size_t>(m), 1.0));
    return clifford_osserman({d.n, make_clifford_structures(d.n, m, d.seed), num("lambda0", 1.0), lambdas});
  }
  if (d.kind == "random") return random_curvature(d.n, d.seed, num("scale", 1.0));
  if (d.kind == "single_plane") return single_plane(d.n);
  if (d.kind == "perturbed") {
    if (!p.contains("base")) throw IoError("corpus: perturbed descriptor needs params.base");
    const TensorDescriptor base = descriptor_from_json(p["base"]);
    if (base.n != d.n) throw DimensionError("corpus: perturbed base dimension mismatch");
    return perturb(resolve(base), random_curvature(d.n, d.seed, num("noise_scale", 1.0)), num("epsilon", 0.0));
  }
  throw IoError("corpus: unknown tensor kind \"" + d.kind + "\"");
}

}  // namespace curvlab
