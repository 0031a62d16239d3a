// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests: JSON files listing paired clouds and how each
// contaminated cloud was produced.
//
//   {"entries": [{"clean": "a.xyz", "contaminated": "a_noisy.xyz",
//                 "noise_level": 0.01, "outlier_fraction": 0.3,
//                 "outlier_min_distance": 0.015, "distance_unit": "diagonal",
//                 "seed": 7}]}
//
// Relative paths are resolved against the manifest's directory.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcclean/data/contaminate.hpp"

namespace pcclean {

struct ManifestEntry {
  std::string clean;
  std::string contaminated;
  ContaminationSpec spec;
  friend bool operator==(const ManifestEntry& a, const ManifestEntry& b) {
    return a.clean == b.clean && a.contaminated == b.contaminated && a.spec.noise_level == b.spec.noise_level &&
           a.spec.outlier_fraction == b.spec.outlier_fraction &&
           a.spec.outlier_min_distance == b.spec.outlier_min_distance &&
           a.spec.distance_unit == b.spec.distance_unit && a.spec.seed == b.spec.seed;
  }
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

[[nodiscard]] inline std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json doc;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : m.entries) {
    doc["entries"].push_back({{"clean", e.clean},
                              {"contaminated", e.contaminated},
                              {"noise_level", e.spec.noise_level},
                              {"outlier_fraction", e.spec.outlier_fraction},
                              {"outlier_min_distance", e.spec.outlier_min_distance},
                              {"distance_unit", to_string(e.spec.distance_unit)},
                              {"seed", e.spec.seed}});
  }
  return doc.dump(2) + "\n";
}

[[nodiscard]] inline Manifest manifest_from_json(const std::string& text, const std::string& name = "manifest") {
  Manifest m;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.clean = e.at("clean").get<std::string>();
      entry.contaminated = e.at("contaminated").get<std::string>();
      entry.spec.noise_level = e.value("noise_level", 0.0);
      entry.spec.outlier_fraction = e.value("outlier_fraction", 0.0);
      entry.spec.outlier_min_distance = e.value("outlier_min_distance", 0.015);
      entry.spec.distance_unit = parse_distance_unit(e.value("distance_unit", std::string("diagonal")));
      entry.spec.seed = e.value("seed", std::uint64_t{0});
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(name + ": " + ex.what());
  } catch (const InvalidArgument& ex) {
    throw DataError(name + ": " + ex.what());
  }
  return m;
}

[[nodiscard]] inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Manifest m = manifest_from_json(ss.str(), path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (ManifestEntry& e : m.entries) {
    if (std::filesystem::path(e.clean).is_relative()) e.clean = (base / e.clean).string();
    if (std::filesystem::path(e.contaminated).is_relative()) e.contaminated = (base / e.contaminated).string();
  }
  return m;
}

inline void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open manifest for writing: " + path);
  out << manifest_to_json(m);
}

}  // namespace pcclean
