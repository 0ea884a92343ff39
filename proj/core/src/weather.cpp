#include "wildfire/data/weather.hpp"

#include <cmath>
#include <string>

namespace wildfire::data {
namespace {

void check_series(const HourlySeries& s, const char* name, bool bounded_0_100,
                  bool non_negative) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i > 0 && s[i].first <= s[i - 1].first)
            throw DataError(std::string(name) +
                            " series timestamps are not strictly increasing at entry " +
                            std::to_string(i));
        const double v = s[i].second;
        if (!std::isfinite(v))
            throw DataError(std::string(name) + " series has a non-finite value at entry " +
                            std::to_string(i));
        if (bounded_0_100 && (v < 0.0 || v > 100.0))
            throw DataError(std::string(name) + " value " + std::to_string(v) +
                            " outside [0, 100]");
        if (non_negative && v < 0.0)
            throw DataError(std::string(name) + " value " + std::to_string(v) +
                            " is negative");
    }
}

// Mean over [end_hour - days*24, end_hour); present hours only.
double window_mean(const HourlySeries& s, long long end_hour, int days,
                   const char* name) {
    const long long span = static_cast<long long>(days) * 24;
    const long long start = end_hour - span;
    double sum = 0.0;
    long long present = 0;
    for (const auto& [hour, value] : s) {
        if (hour >= start && hour < end_hour) {
            sum += value;
            ++present;
        }
    }
    const long long missing = span - present;
    if (2 * missing > span)
        throw DataError("more than half of the " + std::to_string(days) + "-day " +
                        name + " window is missing (" + std::to_string(missing) +
                        " of " + std::to_string(span) + " hours)");
    return sum / present;
}

}  // namespace

std::array<double, 12> aggregate_weather(const WeatherSeries& series,
                                         const Date& discovery_date) {
    check_series(series.temperature, "temperature", false, false);
    check_series(series.wind_speed, "wind speed", false, false);
    check_series(series.humidity, "humidity", true, false);
    check_series(series.precipitation, "precipitation", false, true);

    const long long end_hour = days_from_civil(discovery_date) * 24;
    const HourlySeries* streams[4] = {&series.temperature, &series.wind_speed,
                                      &series.humidity, &series.precipitation};
    const char* names[4] = {"temperature", "wind speed", "humidity", "precipitation"};
    const int windows[3] = {7, 15, 30};

    std::array<double, 12> out{};
    for (int v = 0; v < 4; ++v)
        for (int w = 0; w < 3; ++w)
            out[v * 3 + w] = window_mean(*streams[v], end_hour, windows[w], names[v]);
    return out;
}

}  // namespace wildfire::data
