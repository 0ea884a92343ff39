#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "wildfire/error.hpp"

namespace wildfire::data {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    bool operator==(const Date&) const = default;
};

// Days since 1970-01-01 (proleptic Gregorian; negative before the epoch).
long long days_from_civil(const Date& d);

// Strict "YYYY-MM-DD"; rejects impossible dates (2021-02-30, month 13, ...).
Date parse_date(const std::string& s);

// One fire incident row from the source table.
struct FireRecord {
    long long fod_id = 0;
    double latitude = 0.0;    // decimal degrees, NAD83
    double longitude = 0.0;
    Date discovery_date;
    int cause_code = 0;       // 1..12 cause ids
    double fire_size = 0.0;   // acres
    int vegetation_category = 0;  // 1..28
};

// The positive class: cause id 1 (lightning / natural).
bool is_natural_cause(int cause_code);

// A record plus its pre-aggregated weather means, ordered
// [temp7, temp15, temp30, wind7, wind15, wind30,
//  humid7, humid15, humid30, precip7, precip15, precip30].
struct ParsedRow {
    FireRecord record;
    std::array<double, 12> weather{};
};

struct ParseResult {
    std::vector<ParsedRow> rows;
    std::size_t dropped = 0;  // rows removed for empty required cells
};

// Reads the documented CSV schema: a header row naming at least
//   FOD_ID, LATITUDE, LONGITUDE, DISCOVERY_DATE, STAT_CAUSE_CODE, FIRE_SIZE,
//   veg_category, avg_{temp,wind,humid,precip}_{7d,15d,30d}
// in any order (extra columns are ignored). Rows with an empty required cell
// are dropped and counted; structurally broken rows (wrong field count,
// unparsable numbers or dates) raise ParseError with the 1-based line
// number; out-of-domain values (latitude 91, cause 13, vegetation 29) raise
// DataError.
ParseResult parse_records(std::istream& in);

// 28 source vegetation categories onto 6 coarse groups. The shipped default
// keeps the source table's families together: forests (1-7, 16-22) -> 1,
// savanna/grassland (8-10) -> 2, shrubland (11-12) -> 3, tundra/desert/polar
// (13-15) -> 4, cropland/pasture (24-27) -> 5, water/urban (23, 28) -> 6.
class VegetationMap {
public:
    static VegetationMap defaults();
    // CSV with header "veg_category,group"; every category 1..28 must be
    // assigned a group in 1..6 exactly once.
    static VegetationMap from_csv(std::istream& in);

    int group_of(int category) const;  // 1..28 -> 1..6
    std::array<double, 6> one_hot(int category) const;

private:
    std::array<int, 28> group_{};
};

}  // namespace wildfire::data
