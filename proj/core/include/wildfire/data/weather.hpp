#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "wildfire/data/records.hpp"
#include "wildfire/error.hpp"

namespace wildfire::data {

// One observation: (hour index, value), hours counted from 1970-01-01 00:00.
using HourlySeries = std::vector<std::pair<long long, double>>;

// Raw station observations leading up to a discovery date.
struct WeatherSeries {
    HourlySeries temperature;    // degrees C
    HourlySeries wind_speed;     // m/s
    HourlySeries humidity;       // percent, [0, 100]
    HourlySeries precipitation;  // mm, >= 0
};

// Trailing-window means over the 7-, 15-, and 30-day windows ending at
// discovery-date 00:00 (exclusive), ordered
// [temp7, temp15, temp30, wind7, wind15, wind30,
//  humid7, humid15, humid30, precip7, precip15, precip30].
// Hours with no observation are excluded from both numerator and
// denominator; when more than half of a window is missing the estimate is
// refused with a DataError naming the window.
// Validates the series invariants: strictly increasing timestamps, humidity
// in [0, 100], precipitation >= 0.
std::array<double, 12> aggregate_weather(const WeatherSeries& series,
                                         const Date& discovery_date);

}  // namespace wildfire::data
