#include "wildfire/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "wildfire/data/image.hpp"

namespace wildfire::grid {
namespace {

constexpr double kDegPerCell = 0.0009;  // 100 m of latitude
constexpr double kPi = 3.14159265358979323846;

}  // namespace

ProbabilityGrid predict_grid(models::HybridModel& model,
                             const data::Standardizer& standardizer,
                             const std::vector<double>& info_row,
                             const Tensor& tiles, int rows, int cols,
                             double origin_lat, double origin_lon) {
    if (rows < 1 || cols < 1)
        throw ConfigError("grid: rows and cols must be positive");
    const int n = rows * cols;
    const int width = model.config().tabular_width;
    if (static_cast<int>(info_row.size()) != width)
        throw DimensionError("grid: info row has " + std::to_string(info_row.size()) +
                             " values, the model takes " + std::to_string(width));
    if (tiles.ndim() != 4 || tiles.dim(0) != n)
        throw DimensionError("grid: tiles are " + shape_str(tiles.shape()) +
                             ", expected [" + std::to_string(n) + ", 1, hw, hw]");
    if (origin_lat < -90.0 || origin_lat > 90.0 || origin_lon < -180.0 ||
        origin_lon > 180.0)
        throw DataError("grid: origin is not a lat/lon pair");

    // One tabular row, standardized once, repeated per tile.
    Tensor one(Shape{1, width}, info_row);
    const Tensor std_row = standardizer.apply(one);
    Tensor tabular(Shape{n, width});
    auto tv = tabular.values();
    for (int r = 0; r < n; ++r)
        std::copy(std_row.values().begin(), std_row.values().end(),
                  tv.begin() + static_cast<std::ptrdiff_t>(r) * width);

    std::vector<int> all_ones(n, 1);  // labels unused; scoring only
    models::HybridEval eval = evaluate_hybrid(model, tabular, tiles, all_ones);

    ProbabilityGrid grid;
    grid.origin_lat = origin_lat;
    grid.origin_lon = origin_lon;
    grid.rows = rows;
    grid.cols = cols;
    grid.cells.resize(n);
    for (int r = 0; r < rows; ++r) {
        const double lat = origin_lat - (r + 0.5) * kDegPerCell;
        const double lon_step = kDegPerCell / std::cos(lat * kPi / 180.0);
        for (int c = 0; c < cols; ++c) {
            GridCell& cell = grid.cells[r * cols + c];
            cell.row = r;
            cell.col = c;
            cell.lat = lat;
            cell.lon = origin_lon + (c + 0.5) * lon_step;
            cell.probability = eval.scores[r * cols + c];
            cell.flag_gt_70 = cell.probability > 0.70;
        }
    }
    return grid;
}

void write_grid_csv(std::ostream& out, const ProbabilityGrid& grid) {
    out << "row,col,lat,lon,probability,flag_gt_70\n";
    out << std::setprecision(17);
    for (const GridCell& c : grid.cells)
        out << c.row << "," << c.col << "," << c.lat << "," << c.lon << ","
            << c.probability << "," << (c.flag_gt_70 ? 1 : 0) << "\n";
}

void write_grid_csv(const std::string& path, const ProbabilityGrid& grid) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_grid_csv(out, grid);
}

void write_grid_pgm(const std::string& path, const ProbabilityGrid& grid) {
    std::vector<double> values(grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        values[i] = grid.cells[i].probability;
    data::write_pgm(path, grid.cols, grid.rows, values);
}

}  // namespace wildfire::grid
