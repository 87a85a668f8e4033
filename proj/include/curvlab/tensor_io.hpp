#pragma once

// JSON tensor files.
//
//   {"n": 3, "format": "dense-rowmajor-ijkl", "components": [n^4 numbers]}
//   {"n": 3, "format": "sparse-ijkl", "entries": [[i, j, k, l, value], ...]}
//
// Unlisted sparse entries are zero. Loading validates the curvature
// identities and rejects violating files unless projection is requested.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/error.hpp"
#include "curvlab/tensor.hpp"
#include "json.hpp"

namespace curvlab {

enum class LoadMode { validate, project };

inline constexpr const char* kDenseFormat = "dense-rowmajor-ijkl";
inline constexpr const char* kSparseFormat = "sparse-ijkl";

inline RawTensor raw_tensor_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("n")) throw IoError("tensor JSON: missing field \"n\"");
  if (!doc["n"].is_number_integer()) throw IoError("tensor JSON: \"n\" must be an integer");
  const int n = doc["n"].get<int>();
  if (n < 2) throw DimensionError("tensor JSON: n must be >= 2");
  const std::string format = doc.value("format", std::string(kDenseFormat));

  if (format == kDenseFormat) {
    if (!doc.contains("components") || !doc["components"].is_array()) {
      throw IoError("tensor JSON: dense format needs a \"components\" array");
    }
    std::vector<double> data;
    data.reserve(doc["components"].size());
    for (const auto& v : doc["components"]) {
      if (!v.is_number()) throw NonFiniteError("tensor JSON: non-numeric component");
      data.push_back(v.get<double>());
    }
    return RawTensor(n, std::move(data));
  }
  if (format == kSparseFormat) {
    if (!doc.contains("entries") || !doc["entries"].is_array()) {
      throw IoError("tensor JSON: sparse format needs an \"entries\" array");
    }
    RawTensor raw(n);
    for (const auto& e : doc["entries"]) {
      if (!e.is_array() || e.size() != 5) throw IoError("tensor JSON: sparse entry must be [i,j,k,l,value]");
      int idx[4];
      for (int s = 0; s < 4; ++s) {
        if (!e[s].is_number_integer()) throw IoError("tensor JSON: sparse index must be an integer");
        idx[s] = e[s].get<int>();
        if (idx[s] < 0 || idx[s] >= n) throw DimensionError("tensor JSON: sparse index out of range");
      }
      if (!e[4].is_number()) throw NonFiniteError("tensor JSON: non-numeric sparse value");
      raw(idx[0], idx[1], idx[2], idx[3]) = e[4].get<double>();
    }
    return raw;
  }
  throw IoError("tensor JSON: unknown format \"" + format + "\"");
}

inline CurvatureTensor tensor_from_json(const nlohmann::json& doc, LoadMode mode = LoadMode::validate) {
  RawTensor raw = raw_tensor_from_json(doc);
  if (mode == LoadMode::project) return project_to_curvature(raw);
  return from_dense(raw.dim(), std::move(raw.data()));
}

inline nlohmann::json tensor_to_json(const CurvatureTensor& t) {
  return nlohmann::json{{"n", t.dim()}, {"format", kDenseFormat}, {"components", t.data()}};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline CurvatureTensor load_tensor(const std::filesystem::path& path, LoadMode mode = LoadMode::validate) {
  return tensor_from_json(read_json_file(path), mode);
}

inline void save_tensor(const CurvatureTensor& t, const std::filesystem::path& path) {
  write_text_file(path, tensor_to_json(t).dump() + "\n");
}

}  // namespace curvlab
