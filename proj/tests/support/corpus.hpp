#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "magpi/magpi.hpp"

namespace corpus {

inline std::string dir() { return MAGPI_CORPUS_DIR; }
inline std::string path(const std::string& file) { return dir() + "/" + file; }

inline magpi::Program load(const std::string& file) {
  auto r = magpi::parse_source(magpi::load_source(path(file)));
  if (!r.ok()) throw std::runtime_error(file + ": " + r.diagnostics.front().message);
  return *r.program;
}

inline nlohmann::json manifest() {
  std::ifstream in(path("manifest.json"));
  if (!in) throw std::runtime_error("cannot open manifest");
  return nlohmann::json::parse(in);
}

// By value, so range-for over it is safe.
inline nlohmann::json entries() { return manifest()["entries"]; }

// Entries expected to be safe, in manifest order.
inline std::vector<std::string> safe_entries() {
  std::vector<std::string> out;
  for (const auto& e : entries())
    if (e["expected"].value("safety", "") == "Holds") out.push_back(e["file"]);
  return out;
}

}  // namespace corpus
