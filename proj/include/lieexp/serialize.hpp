#pragma once

// JSON forms of algebra elements, module specs and module artifacts, plus
// the on-disk module cache. Schemas: docs/schemas.md.

#include <optional>
#include <string>

#include <json.hpp>

#include "lieexp/hwmod.hpp"
#include "lieexp/liealg.hpp"

namespace lieexp {

nlohmann::json to_json(const CentralElement& x);
CentralElement element_from_json(const nlohmann::json& j, const AlgebraPtr& loop_algebra = nullptr);

nlohmann::json spec_to_json(const HighestWeightSpec& s);
/// Accepts numbers or strings ("1/2", "0.3") for c and h.
HighestWeightSpec spec_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the canonical spec, as 16 hex digits.
std::string spec_key(const HighestWeightSpec& s);
std::string fnv1a_hex(const std::string& text);

nlohmann::json module_to_json(const GradedModule& m);
GradedModule module_from_json(const nlohmann::json& j);

/// Cache directory from LIEEXP_CACHE_DIR, if set and non-empty.
std::optional<std::string> cache_dir_from_env();

/// Loads the module from `cache_dir` when present, else builds it and
/// stores the artifact there. Without a cache directory it just builds.
ModulePtr load_or_build(const HighestWeightSpec& s, const std::optional<std::string>& cache_dir,
                        bool* from_cache = nullptr);

}  // namespace lieexp
