#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "wildfire/data/image.hpp"
#include "wildfire/data/records.hpp"
#include "wildfire/tensor.hpp"

namespace wildfire::data {

// Labeled rows with a clean linear boundary and a margin, for optimizer and
// learnability checks. Labels alternate 0/1 so the classes stay balanced.
struct TabularTask {
    Tensor x;            // [rows, width]
    std::vector<int> y;
};

TabularTask separable_tabular(int rows, int width, std::uint64_t seed);

// Image-labeled task: label-1 tiles are bright (mean 0.7), label-0 tiles dark
// (mean 0.3), each pixel jittered by +-0.1; the tabular block is pure noise,
// so any skill above chance must come from the imagery.
struct ImageTask {
    Tensor tabular;      // [rows, tabular_width], N(0,1) noise
    Tensor images;       // [rows, 1, 100, 100]
    std::vector<int> y;
};

ImageTask brightness_task(int rows, int tabular_width, std::uint64_t seed);

// A full synthetic corpus in the input-CSV schema: every third row is
// natural-cause and runs hot, dry, and windy with a bright tile; the rest
// run cool and wet with dark tiles. Round-trips through parse_records.
struct SyntheticCorpus {
    std::vector<ParsedRow> rows;
    std::vector<GrayImage> tiles;  // aligned with rows; source_id = fod_id
};

SyntheticCorpus synthetic_corpus(int rows, std::uint64_t seed);

// Writes rows in the documented input schema (header + one line per row).
void write_corpus_csv(std::ostream& out, const std::vector<ParsedRow>& rows);

}  // namespace wildfire::data
