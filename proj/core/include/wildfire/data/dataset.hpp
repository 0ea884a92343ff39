#pragma once

#include <string>
#include <vector>

#include "wildfire/data/image.hpp"
#include "wildfire/data/records.hpp"
#include "wildfire/tensor.hpp"

namespace wildfire::data {

// The ready-to-train table. Feature columns, in order:
//   [lat, lon, temp7, temp15, temp30, wind7, wind15, wind30,
//    humid7, humid15, humid30, precip7, precip15, precip30, (veg1..veg6)]
// so the width is 14 bare and 20 with the vegetation block.
struct Dataset {
    Tensor features;                // [n, width]
    std::vector<int> labels;        // 1 = natural cause
    std::vector<long long> ids;     // fod_id per row
    Tensor images;                  // [n, 1, 100, 100] when loaded
    bool has_images = false;
    int width = 0;
};

// Builds the table from parsed rows. With include_images, every row must
// have <fod_id>.pgm or <fod_id>.png under image_dir; rows that do not are
// reported together in one DataError.
Dataset assemble_dataset(const std::vector<ParsedRow>& rows,
                         const VegetationMap& veg, bool include_vegetation,
                         bool include_images = false,
                         const std::string& image_dir = "");

// Column z-scoring with train-split statistics; the statistics ride along in
// the checkpoint so evaluation applies the identical transform.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stdev;  // constant columns store 1.0 (pass-through)

    static Standardizer fit(const Tensor& x);        // x: [n, d], n >= 1
    static Standardizer identity(int width);          // no-op transform
    Tensor apply(const Tensor& x) const;
};

}  // namespace wildfire::data
