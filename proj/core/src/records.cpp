#include "wildfire/data/records.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace wildfire::data {
namespace {

// Howard Hinnant's days-from-civil algorithm (public domain).
long long civil_to_days(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Splits one CSV line; double quotes guard embedded commas, doubled quotes
// escape a literal quote.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted)
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
    out.push_back(cell);
    return out;
}

double parse_double(const std::string& cell, const std::string& column,
                    std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != trim(cell).size() && used != cell.size())
            throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": column " + column +
                         " value '" + cell + "' is not a number");
    }
}

long long parse_integer(const std::string& cell, const std::string& column,
                        std::size_t line_no) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(cell, &used);
        if (used != trim(cell).size() && used != cell.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": column " + column +
                         " value '" + cell + "' is not an integer");
    }
}

const char* const kWeatherColumns[12] = {
    "avg_temp_7d",   "avg_temp_15d",   "avg_temp_30d",
    "avg_wind_7d",   "avg_wind_15d",   "avg_wind_30d",
    "avg_humid_7d",  "avg_humid_15d",  "avg_humid_30d",
    "avg_precip_7d", "avg_precip_15d", "avg_precip_30d"};

}  // namespace

long long days_from_civil(const Date& d) {
    return civil_to_days(d.year, d.month, d.day);
}

Date parse_date(const std::string& s) {
    const std::string t = trim(s);
    if (t.size() != 10 || t[4] != '-' || t[7] != '-')
        throw ParseError("date '" + s + "' is not in YYYY-MM-DD form");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(t[i])))
            throw ParseError("date '" + s + "' is not in YYYY-MM-DD form");
    Date d;
    d.year = std::stoi(t.substr(0, 4));
    d.month = std::stoi(t.substr(5, 2));
    d.day = std::stoi(t.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw ParseError("date '" + s + "' is not a real calendar date");
    return d;
}

bool is_natural_cause(int cause_code) { return cause_code == 1; }

ParseResult parse_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("line 1: empty input, expected a header row");
    const std::vector<std::string> header = split_csv(line, 1);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;

    std::vector<std::string> required = {"FOD_ID",          "LATITUDE",
                                         "LONGITUDE",       "DISCOVERY_DATE",
                                         "STAT_CAUSE_CODE", "FIRE_SIZE",
                                         "veg_category"};
    for (const char* w : kWeatherColumns) required.push_back(w);
    std::string missing;
    for (const std::string& name : required)
        if (!col.count(name)) missing += (missing.empty() ? "" : ", ") + name;
    if (!missing.empty())
        throw ParseError("header is missing required columns: " + missing);

    ParseResult result;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line, line_no);
        if (cells.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": has " +
                             std::to_string(cells.size()) + " fields, header has " +
                             std::to_string(header.size()));

        bool incomplete = false;
        for (const std::string& name : required)
            if (trim(cells[col[name]]).empty()) incomplete = true;
        if (incomplete) {
            ++result.dropped;
            continue;
        }

        ParsedRow row;
        FireRecord& r = row.record;
        r.fod_id = parse_integer(cells[col["FOD_ID"]], "FOD_ID", line_no);
        r.latitude = parse_double(cells[col["LATITUDE"]], "LATITUDE", line_no);
        r.longitude = parse_double(cells[col["LONGITUDE"]], "LONGITUDE", line_no);
        try {
            r.discovery_date = parse_date(cells[col["DISCOVERY_DATE"]]);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        r.cause_code = static_cast<int>(
            parse_integer(cells[col["STAT_CAUSE_CODE"]], "STAT_CAUSE_CODE", line_no));
        r.fire_size = parse_double(cells[col["FIRE_SIZE"]], "FIRE_SIZE", line_no);
        r.vegetation_category = static_cast<int>(
            parse_integer(cells[col["veg_category"]], "veg_category", line_no));
        for (int i = 0; i < 12; ++i)
            row.weather[i] =
                parse_double(cells[col[kWeatherColumns[i]]], kWeatherColumns[i], line_no);

        if (r.latitude < -90.0 || r.latitude > 90.0)
            throw DataError("line " + std::to_string(line_no) + ": latitude " +
                            std::to_string(r.latitude) + " outside [-90, 90]");
        if (r.longitude < -180.0 || r.longitude > 180.0)
            throw DataError("line " + std::to_string(line_no) + ": longitude " +
                            std::to_string(r.longitude) + " outside [-180, 180]");
        if (r.cause_code < 1 || r.cause_code > 12)
            throw DataError("line " + std::to_string(line_no) + ": cause code " +
                            std::to_string(r.cause_code) + " outside 1..12");
        if (r.vegetation_category < 1 || r.vegetation_category > 28)
            throw DataError("line " + std::to_string(line_no) + ": vegetation category " +
                            std::to_string(r.vegetation_category) + " outside 1..28");
        result.rows.push_back(std::move(row));
    }
    return result;
}

VegetationMap VegetationMap::defaults() {
    VegetationMap m;
    for (int cat = 1; cat <= 28; ++cat) {
        int g;
        if ((cat >= 1 && cat <= 7) || (cat >= 16 && cat <= 22)) {
            g = 1;  // forests, primary and secondary
        } else if (cat >= 8 && cat <= 10) {
            g = 2;  // savanna / grassland
        } else if (cat == 11 || cat == 12) {
            g = 3;  // shrubland
        } else if (cat >= 13 && cat <= 15) {
            g = 4;  // tundra / desert / polar
        } else if (cat >= 24 && cat <= 27) {
            g = 5;  // cropland / pasture
        } else {
            g = 6;  // water (23) and urban (28)
        }
        m.group_[cat - 1] = g;
    }
    return m;
}

VegetationMap VegetationMap::from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("vegetation map: empty input, expected a header row");
    const std::vector<std::string> header = split_csv(line, 1);
    if (header.size() != 2 || trim(header[0]) != "veg_category" ||
        trim(header[1]) != "group")
        throw ParseError("vegetation map: header must be 'veg_category,group'");

    VegetationMap m;
    std::array<bool, 28> seen{};
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line, line_no);
        if (cells.size() != 2)
            throw ParseError("vegetation map line " + std::to_string(line_no) +
                             ": expected 2 fields");
        const int cat = static_cast<int>(parse_integer(cells[0], "veg_category", line_no));
        const int g = static_cast<int>(parse_integer(cells[1], "group", line_no));
        if (cat < 1 || cat > 28)
            throw DataError("vegetation map line " + std::to_string(line_no) +
                            ": category " + std::to_string(cat) + " outside 1..28");
        if (g < 1 || g > 6)
            throw DataError("vegetation map line " + std::to_string(line_no) +
                            ": group " + std::to_string(g) + " outside 1..6");
        if (seen[cat - 1])
            throw DataError("vegetation map line " + std::to_string(line_no) +
                            ": category " + std::to_string(cat) + " assigned twice");
        seen[cat - 1] = true;
        m.group_[cat - 1] = g;
    }
    for (int cat = 1; cat <= 28; ++cat)
        if (!seen[cat - 1])
            throw DataError("vegetation map: category " + std::to_string(cat) +
                            " has no group");
    return m;
}

int VegetationMap::group_of(int category) const {
    if (category < 1 || category > 28)
        throw DataError("vegetation category " + std::to_string(category) +
                        " outside 1..28");
    return group_[category - 1];
}

std::array<double, 6> VegetationMap::one_hot(int category) const {
    std::array<double, 6> out{};
    out[group_of(category) - 1] = 1.0;
    return out;
}

}  // namespace wildfire::data
