#include "wildfire/data/synthetic.hpp"

#include <cmath>
#include <iomanip>

namespace wildfire::data {
namespace {

double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace

TabularTask separable_tabular(int rows, int width, std::uint64_t seed) {
    if (rows < 2 || width < 1)
        throw ConfigError("separable_tabular: needs rows >= 2 and width >= 1");
    Rng rng(Rng::derive(seed, 5));

    // A fixed unit normal direction; rows are resampled until they land on
    // the requested side with at least 0.3 margin.
    std::vector<double> w(width);
    double norm = 0.0;
    for (double& wi : w) {
        wi = rng.normal();
        norm += wi * wi;
    }
    norm = std::sqrt(norm);
    for (double& wi : w) wi /= norm;

    TabularTask task;
    task.x = Tensor(Shape{rows, width});
    auto xv = task.x.values();
    task.y.resize(rows);
    std::vector<double> row(width);
    for (int r = 0; r < rows; ++r) {
        const int label = r % 2;
        for (;;) {
            double dot = 0.0;
            for (int c = 0; c < width; ++c) {
                row[c] = rng.normal();
                dot += row[c] * w[c];
            }
            if (std::abs(dot) < 0.3) continue;
            if ((dot > 0.0) == (label == 1)) break;
        }
        for (int c = 0; c < width; ++c) xv[r * width + c] = row[c];
        task.y[r] = label;
    }
    return task;
}

ImageTask brightness_task(int rows, int tabular_width, std::uint64_t seed) {
    if (rows < 2 || tabular_width < 1)
        throw ConfigError("brightness_task: needs rows >= 2 and width >= 1");
    Rng rng(Rng::derive(seed, 6));

    ImageTask task;
    task.tabular = Tensor(Shape{rows, tabular_width});
    task.images = Tensor(Shape{rows, 1, 100, 100});
    task.y.resize(rows);
    auto tv = task.tabular.values();
    auto iv = task.images.values();
    for (int r = 0; r < rows; ++r) {
        task.y[r] = r % 2;
        for (int c = 0; c < tabular_width; ++c)
            tv[r * tabular_width + c] = rng.normal();
        const double base = task.y[r] ? 0.7 : 0.3;
        double* px = &iv[static_cast<std::size_t>(r) * 100 * 100];
        for (int p = 0; p < 100 * 100; ++p)
            px[p] = clamp(base + rng.uniform(-0.1, 0.1), 0.0, 1.0);
    }
    return task;
}

SyntheticCorpus synthetic_corpus(int rows, std::uint64_t seed) {
    if (rows < 3) throw ConfigError("synthetic_corpus: needs at least 3 rows");
    Rng rng(Rng::derive(seed, 7));
    static const int kOtherCauses[] = {2, 3, 4, 5, 7, 8, 9};

    SyntheticCorpus corpus;
    corpus.rows.reserve(rows);
    corpus.tiles.reserve(rows);
    for (int i = 0; i < rows; ++i) {
        const bool natural = i % 3 == 0;
        ParsedRow row;
        FireRecord& r = row.record;
        r.fod_id = 100000 + i;
        r.latitude = rng.uniform(36.0, 41.0);
        r.longitude = rng.uniform(-124.0, -118.0);
        r.discovery_date = {2015, 6 + static_cast<int>(rng.below(4)),
                            1 + static_cast<int>(rng.below(28))};
        r.cause_code = natural ? 1 : kOtherCauses[rng.below(7)];
        r.fire_size = std::exp(rng.normal()) * 10.0;
        r.vegetation_category = 1 + static_cast<int>(rng.below(28));

        // Hot/dry/windy for natural rows, cool/wet for the rest; the three
        // window means wobble around a shared base value.
        const double temp = natural ? 26.0 + 2.0 * rng.normal() : 14.0 + 2.0 * rng.normal();
        const double wind = natural ? 6.0 + 1.5 * rng.normal() : 3.0 + 1.0 * rng.normal();
        const double humid = natural ? 20.0 + 5.0 * rng.normal() : 60.0 + 8.0 * rng.normal();
        const double precip = natural ? 0.2 + 0.1 * rng.normal() : 2.0 + 0.6 * rng.normal();
        for (int w = 0; w < 3; ++w) {
            row.weather[w] = temp + 0.5 * rng.normal();
            row.weather[3 + w] = std::max(0.0, wind + 0.3 * rng.normal());
            row.weather[6 + w] = clamp(humid + 2.0 * rng.normal(), 0.0, 100.0);
            row.weather[9 + w] = std::max(0.0, precip + 0.1 * rng.normal());
        }
        corpus.rows.push_back(row);

        GrayImage tile;
        tile.width = 100;
        tile.height = 100;
        tile.source_id = r.fod_id;
        tile.pixels.resize(100 * 100);
        const double base = natural ? 0.7 : 0.3;
        for (double& p : tile.pixels) p = clamp(base + rng.uniform(-0.1, 0.1), 0.0, 1.0);
        corpus.tiles.push_back(std::move(tile));
    }
    return corpus;
}

void write_corpus_csv(std::ostream& out, const std::vector<ParsedRow>& rows) {
    out << "FOD_ID,LATITUDE,LONGITUDE,DISCOVERY_DATE,STAT_CAUSE_CODE,FIRE_SIZE,"
           "veg_category,"
           "avg_temp_7d,avg_temp_15d,avg_temp_30d,"
           "avg_wind_7d,avg_wind_15d,avg_wind_30d,"
           "avg_humid_7d,avg_humid_15d,avg_humid_30d,"
           "avg_precip_7d,avg_precip_15d,avg_precip_30d\n";
    out << std::setprecision(10);
    for (const ParsedRow& row : rows) {
        const FireRecord& r = row.record;
        out << r.fod_id << "," << r.latitude << "," << r.longitude << ","
            << std::setw(4) << std::setfill('0') << r.discovery_date.year << "-"
            << std::setw(2) << r.discovery_date.month << "-" << std::setw(2)
            << r.discovery_date.day << std::setfill(' ') << std::setw(0) << ","
            << r.cause_code << "," << r.fire_size << "," << r.vegetation_category;
        for (double w : row.weather) out << "," << w;
        out << "\n";
    }
}

}  // namespace wildfire::data
