#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wildfire/data/dataset.hpp"
#include "wildfire/models/hybrid.hpp"

namespace wildfire::grid {

struct GridCell {
    int row = 0;
    int col = 0;
    double lat = 0.0;
    double lon = 0.0;
    double probability = 0.0;
    bool flag_gt_70 = false;  // strictly greater than 0.70
};

struct ProbabilityGrid {
    double origin_lat = 0.0;  // northwest corner
    double origin_lon = 0.0;
    int rows = 0;
    int cols = 0;
    double cell_meters = 100.0;
    std::vector<GridCell> cells;  // row-major, rows*cols entries
};

// Replicates one tabular info row across every tile and scores each tile in
// eval mode. tiles: [rows*cols, 1, 100, 100], row-major by (row, col).
// Cell centers are georeferenced on a local equirectangular approximation
// from the northwest origin: 100 m = 0.0009 deg latitude, longitude scaled
// by 1/cos(lat).
ProbabilityGrid predict_grid(models::HybridModel& model,
                             const data::Standardizer& standardizer,
                             const std::vector<double>& info_row,
                             const Tensor& tiles, int rows, int cols,
                             double origin_lat, double origin_lon);

// CSV columns: row,col,lat,lon,probability,flag_gt_70 (flag as 0/1).
void write_grid_csv(std::ostream& out, const ProbabilityGrid& grid);
void write_grid_csv(const std::string& path, const ProbabilityGrid& grid);

// Heatmap PGM, one pixel per cell: round(255 * probability).
void write_grid_pgm(const std::string& path, const ProbabilityGrid& grid);

}  // namespace wildfire::grid
