#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "wildfire/error.hpp"
#include "wildfire/nn.hpp"

namespace wildfire::io {

// Self-contained model container, version-tagged. Layout:
//
//   wildfire-checkpoint 1\n          format version
//   kind <baseline|hybrid>\n
//   seed <u64>\n
//   digest <hex u64>\n               FNV-1a of the training log (0 if none)
//   config <key> <value>\n           repeated, sorted by key
//   tensor <name> <ndim> <d0...>\n   repeated, storage order
//   end\n
//   <tensor values, raw little-endian float64, manifest order>
//   <8-byte little-endian FNV-1a64 checksum of everything above>
//
// Any structural problem on load — unknown version, malformed manifest,
// shape disagreement, truncation, checksum mismatch — raises IntegrityError;
// the container is never silently migrated.
struct Checkpoint {
    int version = 1;
    std::string kind;
    std::uint64_t seed = 0;
    std::uint64_t log_digest = 0;
    std::map<std::string, std::string> config;
    nn::ParamList tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

// Incremental FNV-1a 64-bit; pass the previous return value to chain.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t h = 14695981039346656037ULL);

}  // namespace wildfire::io
