#pragma once

#include <cstdint>
#include <string>

#include "wildfire/checkpoint.hpp"
#include "wildfire/data/dataset.hpp"
#include "wildfire/models/hybrid.hpp"

namespace wildfire::io {

// Checkpoint wrappers that snapshot the model config alongside the
// parameters, plus the feature standardizer, so a saved model evaluates
// bit-identically after reload without any external state.

struct SavedBaseline {
    models::BaselineNet net;
    data::Standardizer standardizer;
    std::uint64_t seed = 0;
    std::uint64_t log_digest = 0;
    bool with_vegetation = true;
};

struct SavedHybrid {
    models::HybridModel model;
    data::Standardizer standardizer;
    std::uint64_t seed = 0;
    std::uint64_t log_digest = 0;
    bool with_vegetation = true;
};

void save_baseline(const std::string& path, const models::BaselineNet& net,
                   const data::Standardizer& standardizer, std::uint64_t seed,
                   std::uint64_t log_digest, bool with_vegetation);
SavedBaseline load_baseline(const std::string& path);

void save_hybrid(const std::string& path, const models::HybridModel& model,
                 const data::Standardizer& standardizer, std::uint64_t seed,
                 std::uint64_t log_digest, bool with_vegetation);
SavedHybrid load_hybrid(const std::string& path);

// Kind tag ("baseline" | "hybrid") without loading the tensors' worth of
// validation logic twice; still checksum-verified.
std::string checkpoint_kind(const std::string& path);

}  // namespace wildfire::io
