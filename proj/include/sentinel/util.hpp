#pragma once

#include <cstdint>
#include <string>

namespace sentinel {

/// FNV-1a over a byte string; used for config provenance ids.
std::uint64_t fnv1a(const std::string& data);

/// Hex config id from canonical config text.
std::string config_hash(const std::string& canonical);

/// Deterministic per-component seed stream: base seed + component label + index.
std::uint64_t derive_seed(std::uint64_t base, const std::string& label, std::uint64_t index = 0);

}  // namespace sentinel
