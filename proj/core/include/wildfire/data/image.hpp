#pragma once

#include <string>
#include <vector>

#include "wildfire/error.hpp"

namespace wildfire::data {

// Grayscale raster with values in [0, 1], row-major from the top-left.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;
    long long source_id = 0;

    bool operator==(const GrayImage& o) const {
        return width == o.width && height == o.height && pixels == o.pixels;
    }
};

// Reads a binary PGM (P5, 8-bit) or PNG (8-bit gray or color; color is
// reduced by the 0.299/0.587/0.114 luminance weights), scaled to [0, 1].
// Any raster size is accepted here; model-facing loaders add their own
// dimension checks.
GrayImage read_gray(const std::string& path);

// read_gray plus the model-input contract: exactly 100x100.
GrayImage load_gray_image(const std::string& path);

// Writes a binary PGM (P5, maxval 255); values are clamped to [0, 1] and
// mapped to round(255 * v).
void write_pgm(const std::string& path, int width, int height,
               const std::vector<double>& values);

}  // namespace wildfire::data
