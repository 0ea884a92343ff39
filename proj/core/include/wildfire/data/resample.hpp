#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wildfire/error.hpp"
#include "wildfire/rng.hpp"

namespace wildfire::data {

// Deterministic train/test membership over row indices.
struct SplitPlan {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::string method = "none";  // none | undersample | smote
    double ratio = 1.0;           // majority rows kept per minority row
    std::uint64_t seed = 0;
};

// Shuffles all rows and splits them (1 - test_fraction)/test_fraction.
SplitPlan plain_split(std::size_t rows, double test_fraction, std::uint64_t seed);

// Class rebalancing by majority undersampling: keeps every minority row,
// draws floor(minority * ratio) majority rows without replacement, shuffles
// the balanced pool and splits it; every majority row NOT drawn is appended
// to the test side (ascending original index), so nothing is wasted.
// `labels` are 0/1; the minority class is whichever has fewer rows (ties
// take label 1 as minority).
SplitPlan undersample(const std::vector<int>& labels, double ratio,
                      double test_fraction, std::uint64_t seed);

enum class SmoteMode {
    Standard,      // X + u * (Xn - X): on the segment between the pair
    PaperLiteral,  // X + u * |X - Xn| componentwise
};

// One synthetic row from sample x, neighbor xn, and interpolation factor u.
std::vector<double> smote_combine(const std::vector<double>& x,
                                  const std::vector<double>& xn, double u,
                                  SmoteMode mode);

// Synthesizes `amount` minority rows: each picks a random minority sample X,
// one of its k nearest minority neighbors Xn (Euclidean, self excluded, ties
// by lower index), and a single u ~ U(0,1), then applies smote_combine.
std::vector<std::vector<double>> smote(const std::vector<std::vector<double>>& minority,
                                       int k, int amount, std::uint64_t seed,
                                       SmoteMode mode = SmoteMode::Standard);

}  // namespace wildfire::data
