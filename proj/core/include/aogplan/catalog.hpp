#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aogplan/grammar.hpp"

namespace aogplan::grammar {

inline constexpr int kCatalogSchemaVersion = 1;

// Parses one task document. Throws CatalogError on schema violations and
// runs validate() on the result, throwing if the graph is structurally bad.
TaskAog load_task_aog(const std::filesystem::path& file);

// Loads every *.json under `dir`, sorted by task id. Requires the ids to be
// a contiguous 0-based range.
std::vector<TaskAog> load_catalog(const std::filesystem::path& dir);

std::string task_aog_to_json(const TaskAog& aog);

// FNV-1a over the canonical serialization of all graphs; embedded in every
// artifact derived from the catalog so stale mixes are detectable.
std::uint64_t catalog_content_hash(const std::vector<TaskAog>& catalog);

struct CatalogError : GrammarError {
  using GrammarError::GrammarError;
};

}  // namespace aogplan::grammar
