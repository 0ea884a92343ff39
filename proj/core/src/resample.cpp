#include "wildfire/data/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wildfire::data {
namespace {

void check_fraction(double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test fraction " + std::to_string(test_fraction) +
                          " outside (0, 1)");
}

}  // namespace

SplitPlan plain_split(std::size_t rows, double test_fraction, std::uint64_t seed) {
    if (rows < 2) throw DataError("split: needs at least two rows");
    check_fraction(test_fraction);
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive(seed, 1));
    rng.shuffle(order);

    SplitPlan plan;
    plan.method = "none";
    plan.seed = seed;
    const std::size_t train_n =
        static_cast<std::size_t>(std::floor((1.0 - test_fraction) * rows));
    plan.train.assign(order.begin(), order.begin() + train_n);
    plan.test.assign(order.begin() + train_n, order.end());
    return plan;
}

SplitPlan undersample(const std::vector<int>& labels, double ratio,
                      double test_fraction, std::uint64_t seed) {
    check_fraction(test_fraction);
    if (!(ratio > 0.0))
        throw ConfigError("undersample ratio " + std::to_string(ratio) +
                          " must be positive");
    std::vector<std::size_t> ones, zeros;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            ones.push_back(i);
        } else if (labels[i] == 0) {
            zeros.push_back(i);
        } else {
            throw DataError("undersample: label at index " + std::to_string(i) +
                            " is " + std::to_string(labels[i]) + ", expected 0 or 1");
        }
    }
    if (ones.empty() || zeros.empty())
        throw DataError("undersample: both classes must be present");

    // Ties keep label 1 as the minority, matching its role as the rare class.
    std::vector<std::size_t>& minority = ones.size() <= zeros.size() ? ones : zeros;
    std::vector<std::size_t>& majority = ones.size() <= zeros.size() ? zeros : ones;

    const std::size_t keep =
        static_cast<std::size_t>(std::floor(static_cast<double>(minority.size()) * ratio));
    if (keep > majority.size())
        throw DataError("undersample: ratio " + std::to_string(ratio) + " asks for " +
                        std::to_string(keep) + " majority rows, only " +
                        std::to_string(majority.size()) + " exist");

    Rng rng(Rng::derive(seed, 1));
    std::vector<std::size_t> drawn = majority;
    rng.shuffle(drawn);
    std::vector<std::size_t> spare(drawn.begin() + keep, drawn.end());
    drawn.resize(keep);

    std::vector<std::size_t> pool = minority;
    pool.insert(pool.end(), drawn.begin(), drawn.end());
    rng.shuffle(pool);

    SplitPlan plan;
    plan.method = "undersample";
    plan.ratio = ratio;
    plan.seed = seed;
    const std::size_t train_n =
        static_cast<std::size_t>(std::floor((1.0 - test_fraction) * pool.size()));
    plan.train.assign(pool.begin(), pool.begin() + train_n);
    plan.test.assign(pool.begin() + train_n, pool.end());

    // The rest of the majority class still makes honest test rows.
    std::sort(spare.begin(), spare.end());
    plan.test.insert(plan.test.end(), spare.begin(), spare.end());
    return plan;
}

std::vector<double> smote_combine(const std::vector<double>& x,
                                  const std::vector<double>& xn, double u,
                                  SmoteMode mode) {
    if (x.size() != xn.size())
        throw DimensionError("smote: sample width " + std::to_string(x.size()) +
                             " vs neighbor width " + std::to_string(xn.size()));
    std::vector<double> row(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        if (mode == SmoteMode::Standard)
            row[f] = x[f] + u * (xn[f] - x[f]);
        else
            row[f] = x[f] + u * std::abs(x[f] - xn[f]);
    }
    return row;
}

std::vector<std::vector<double>> smote(const std::vector<std::vector<double>>& minority,
                                       int k, int amount, std::uint64_t seed,
                                       SmoteMode mode) {
    if (k < 1) throw ConfigError("smote: k must be positive, got " + std::to_string(k));
    if (amount < 0)
        throw ConfigError("smote: amount must be non-negative, got " +
                          std::to_string(amount));
    if (minority.size() <= static_cast<std::size_t>(k))
        throw DataError("smote: k = " + std::to_string(k) + " needs more than " +
                        std::to_string(k) + " minority rows, got " +
                        std::to_string(minority.size()));
    const std::size_t width = minority.front().size();
    for (std::size_t i = 0; i < minority.size(); ++i)
        if (minority[i].size() != width)
            throw DimensionError("smote: row " + std::to_string(i) + " has width " +
                                 std::to_string(minority[i].size()) + ", expected " +
                                 std::to_string(width));

    // k nearest neighbors per row, ties broken toward the lower index.
    std::vector<std::vector<std::size_t>> nearest(minority.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        dist.clear();
        for (std::size_t j = 0; j < minority.size(); ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t f = 0; f < width; ++f) {
                const double diff = minority[i][f] - minority[j][f];
                d2 += diff * diff;
            }
            dist.push_back({d2, j});
        }
        std::sort(dist.begin(), dist.end());
        nearest[i].reserve(k);
        for (int t = 0; t < k; ++t) nearest[i].push_back(dist[t].second);
    }

    Rng rng(Rng::derive(seed, 2));
    std::vector<std::vector<double>> out;
    out.reserve(amount);
    for (int t = 0; t < amount; ++t) {
        const std::size_t i = rng.below(minority.size());
        const std::size_t j = nearest[i][rng.below(nearest[i].size())];
        const double u = rng.uniform();
        out.push_back(smote_combine(minority[i], minority[j], u, mode));
    }
    return out;
}

}  // namespace wildfire::data
