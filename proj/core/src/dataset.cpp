#include "wildfire/data/dataset.hpp"

#include <cmath>
#include <filesystem>

namespace wildfire::data {

Dataset assemble_dataset(const std::vector<ParsedRow>& rows,
                         const VegetationMap& veg, bool include_vegetation,
                         bool include_images, const std::string& image_dir) {
    if (rows.empty()) throw DataError("assemble_dataset: no rows");
    Dataset ds;
    ds.width = include_vegetation ? 20 : 14;
    ds.features = Tensor(Shape{static_cast<int>(rows.size()), ds.width});
    auto fv = ds.features.values();
    ds.labels.reserve(rows.size());
    ds.ids.reserve(rows.size());

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const FireRecord& rec = rows[r].record;
        double* out = &fv[r * ds.width];
        out[0] = rec.latitude;
        out[1] = rec.longitude;
        for (int i = 0; i < 12; ++i) out[2 + i] = rows[r].weather[i];
        if (include_vegetation) {
            const std::array<double, 6> hot = veg.one_hot(rec.vegetation_category);
            for (int i = 0; i < 6; ++i) out[14 + i] = hot[i];
        }
        ds.labels.push_back(is_natural_cause(rec.cause_code) ? 1 : 0);
        ds.ids.push_back(rec.fod_id);
    }

    if (include_images) {
        namespace fs = std::filesystem;
        std::vector<long long> missing;
        std::vector<std::string> paths(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::string stem =
                (fs::path(image_dir) / std::to_string(ds.ids[r])).string();
            if (fs::exists(stem + ".pgm")) {
                paths[r] = stem + ".pgm";
            } else if (fs::exists(stem + ".png")) {
                paths[r] = stem + ".png";
            } else {
                missing.push_back(ds.ids[r]);
            }
        }
        if (!missing.empty()) {
            std::string list;
            for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
                list += (i ? ", " : "") + std::to_string(missing[i]);
            if (missing.size() > 10)
                list += ", ... (" + std::to_string(missing.size()) + " total)";
            throw DataError("no image tile for fod_id " + list + " under " + image_dir);
        }
        ds.images = Tensor(Shape{static_cast<int>(rows.size()), 1, 100, 100});
        auto iv = ds.images.values();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const GrayImage img = load_gray_image(paths[r]);
            std::copy(img.pixels.begin(), img.pixels.end(),
                      iv.begin() + static_cast<std::ptrdiff_t>(r) * 100 * 100);
        }
        ds.has_images = true;
    }
    return ds;
}

Standardizer Standardizer::fit(const Tensor& x) {
    if (x.ndim() != 2 || x.dim(0) < 1)
        throw DimensionError("standardizer: expected a non-empty [n, d] matrix, got " +
                             shape_str(x.shape()));
    const int n = x.dim(0), d = x.dim(1);
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 0.0);
    auto v = x.values();
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) s.mean[c] += v[r * d + c];
    for (int c = 0; c < d; ++c) s.mean[c] /= n;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) {
            const double diff = v[r * d + c] - s.mean[c];
            s.stdev[c] += diff * diff;
        }
    for (int c = 0; c < d; ++c) {
        s.stdev[c] = std::sqrt(s.stdev[c] / n);
        if (s.stdev[c] == 0.0) s.stdev[c] = 1.0;  // constant column: pass through
    }
    return s;
}

Standardizer Standardizer::identity(int width) {
    Standardizer s;
    s.mean.assign(width, 0.0);
    s.stdev.assign(width, 1.0);
    return s;
}

Tensor Standardizer::apply(const Tensor& x) const {
    const int d = static_cast<int>(mean.size());
    if (x.ndim() != 2 || x.dim(1) != d)
        throw DimensionError("standardizer fitted on width " + std::to_string(d) +
                             ", input is " + shape_str(x.shape()));
    Tensor out(x.shape());
    auto src = x.values();
    auto dst = out.values();
    const int n = x.dim(0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c)
            dst[r * d + c] = (src[r * d + c] - mean[c]) / stdev[c];
    return out;
}

}  // namespace wildfire::data
