#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "wildfire/data/dataset.hpp"
#include "wildfire/data/image.hpp"
#include "wildfire/data/records.hpp"
#include "wildfire/data/resample.hpp"
#include "wildfire/data/synthetic.hpp"
#include "wildfire/data/weather.hpp"

using namespace wildfire;
using namespace wildfire::data;

namespace fs = std::filesystem;

namespace {

const char* kHeader =
    "FOD_ID,LATITUDE,LONGITUDE,DISCOVERY_DATE,STAT_CAUSE_CODE,FIRE_SIZE,veg_category,"
    "avg_temp_7d,avg_temp_15d,avg_temp_30d,avg_wind_7d,avg_wind_15d,avg_wind_30d,"
    "avg_humid_7d,avg_humid_15d,avg_humid_30d,avg_precip_7d,avg_precip_15d,avg_precip_30d";

std::string row(long long id, const char* date, int cause, int veg) {
    std::ostringstream os;
    os << id << ",40.1,-120.5," << date << "," << cause << ",3.5," << veg;
    for (int i = 0; i < 12; ++i) os << "," << (i + 1) * 0.5;
    return os.str();
}

fs::path temp_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("date parsing is strict") {
    Date d = parse_date("2015-07-04");
    CHECK(d.year == 2015);
    CHECK(d.month == 7);
    CHECK(d.day == 4);
    CHECK(parse_date("2000-02-29") == Date{2000, 2, 29});  // 400-rule leap year

    for (const char* bad : {"2021-02-30", "2021-13-01", "1900-02-29", "2015-00-10",
                            "2015-06-00", "2015-6-01", "2015/06/01", "20150601",
                            "2015-06-1", "abcd-ef-gh", "2015-06-012", ""})
        CHECK_THROWS_AS(parse_date(bad), ParseError);
}

TEST_CASE("civil day arithmetic agrees with chrono") {
    using namespace std::chrono;
    for (const Date d : {Date{1970, 1, 1}, Date{1969, 12, 31}, Date{2000, 3, 1},
                         Date{2026, 8, 14}, Date{1843, 2, 28}, Date{2400, 2, 29}}) {
        const auto want = sys_days(year{d.year} / d.month / d.day).time_since_epoch().count();
        CHECK(days_from_civil(d) == want);
    }
}

TEST_CASE("cause polarity") {
    CHECK(is_natural_cause(1));
    for (int c = 2; c <= 12; ++c) CHECK(!is_natural_cause(c));
}

TEST_CASE("csv parsing: happy path with reordered and extra columns") {
    std::ostringstream os;
    os << "extra," << kHeader << ",trailing\n";
    os << "junk," << row(17, "2015-08-02", 1, 11) << ",junk2\n";
    os << "junk," << row(18, "2016-01-31", 4, 3) << ",junk2\n";
    std::istringstream in(os.str());
    ParseResult r = parse_records(in);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.dropped == 0);
    const FireRecord& a = r.rows[0].record;
    CHECK(a.fod_id == 17);
    CHECK(a.latitude == doctest::Approx(40.1));
    CHECK(a.longitude == doctest::Approx(-120.5));
    CHECK(a.discovery_date == Date{2015, 8, 2});
    CHECK(a.cause_code == 1);
    CHECK(a.fire_size == doctest::Approx(3.5));
    CHECK(a.vegetation_category == 11);
    for (int i = 0; i < 12; ++i)
        CHECK(r.rows[0].weather[static_cast<std::size_t>(i)] ==
              doctest::Approx((i + 1) * 0.5));
}

TEST_CASE("csv parsing: quoted fields and CRLF") {
    std::string text = std::string(kHeader) + "\r\n" + row(5, "2010-03-04", 2, 7) + "\r\n";
    std::istringstream in(text);
    ParseResult r = parse_records(in);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].record.fod_id == 5);
}

TEST_CASE("csv parsing: rows with empty required cells are dropped and counted") {
    std::ostringstream os;
    os << kHeader << "\n";
    os << row(1, "2015-08-02", 1, 11) << "\n";
    std::string hole = row(2, "2015-08-03", 2, 4);
    hole.replace(hole.find("40.1"), 4, "");  // empty LATITUDE
    os << hole << "\n";
    os << row(3, "2015-08-04", 3, 5) << "\n";
    std::istringstream in(os.str());
    ParseResult r = parse_records(in);
    CHECK(r.rows.size() == 2);
    CHECK(r.dropped == 1);
    CHECK(r.rows[0].record.fod_id == 1);
    CHECK(r.rows[1].record.fod_id == 3);
}

TEST_CASE("csv parsing: structural faults carry the line number") {
    SUBCASE("wrong field count") {
        std::istringstream in(std::string(kHeader) + "\n1,2,3\n");
        CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("unparsable number") {
        std::string bad = row(9, "2015-08-02", 1, 11);
        bad.replace(bad.find("40.1"), 4, "4o.1");
        std::istringstream in(std::string(kHeader) + "\n" + row(1, "2015-08-02", 1, 1) +
                              "\n" + bad + "\n");
        CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("line 3"), ParseError);
    }
    SUBCASE("bad date") {
        std::istringstream in(std::string(kHeader) + "\n" + row(9, "2015-02-30", 1, 11) +
                              "\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
    SUBCASE("missing header column") {
        std::string hdr(kHeader);
        hdr.replace(hdr.find("LATITUDE"), 8, "LATITUDO");
        std::istringstream in(hdr + "\n");
        CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("LATITUDE"), ParseError);
    }
    SUBCASE("empty stream") {
        std::istringstream in("");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
}

TEST_CASE("csv parsing: domain violations raise DataError") {
    auto feed = [](const std::string& r) {
        std::istringstream in(std::string(kHeader) + "\n" + r + "\n");
        return parse_records(in);
    };
    std::string lat_bad = row(9, "2015-08-02", 1, 11);
    lat_bad.replace(lat_bad.find("40.1"), 4, "91.0");
    CHECK_THROWS_AS(feed(lat_bad), DataError);

    std::string lon_bad = row(9, "2015-08-02", 1, 11);
    lon_bad.replace(lon_bad.find("-120.5"), 6, "-181.0");
    CHECK_THROWS_AS(feed(lon_bad), DataError);

    CHECK_THROWS_AS(feed(row(9, "2015-08-02", 13, 11)), DataError);
    CHECK_THROWS_AS(feed(row(9, "2015-08-02", 0, 11)), DataError);
    CHECK_THROWS_AS(feed(row(9, "2015-08-02", 1, 29)), DataError);
    CHECK_THROWS_AS(feed(row(9, "2015-08-02", 1, 0)), DataError);
}

TEST_CASE("vegetation grouping: shipped defaults") {
    VegetationMap veg = VegetationMap::defaults();
    // forests
    for (int c : {1, 2, 3, 4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22}) CHECK(veg.group_of(c) == 1);
    for (int c : {8, 9, 10}) CHECK(veg.group_of(c) == 2);
    for (int c : {11, 12}) CHECK(veg.group_of(c) == 3);
    for (int c : {13, 14, 15}) CHECK(veg.group_of(c) == 4);
    for (int c : {24, 25, 26, 27}) CHECK(veg.group_of(c) == 5);
    for (int c : {23, 28}) CHECK(veg.group_of(c) == 6);
    CHECK_THROWS_AS(veg.group_of(0), DataError);
    CHECK_THROWS_AS(veg.group_of(29), DataError);

    const auto oh = veg.one_hot(11);
    const std::array<double, 6> want = {0, 0, 1, 0, 0, 0};
    CHECK(oh == want);
}

TEST_CASE("vegetation grouping: csv override") {
    std::ostringstream os;
    os << "veg_category,group\n";
    for (int c = 1; c <= 28; ++c) os << c << "," << (c % 6 + 1) << "\n";
    std::istringstream in(os.str());
    VegetationMap veg = VegetationMap::from_csv(in);
    CHECK(veg.group_of(1) == 2);
    CHECK(veg.group_of(5) == 6);
    CHECK(veg.group_of(6) == 1);

    SUBCASE("a missing category is refused") {
        std::istringstream bad("veg_category,group\n1,1\n");
        CHECK_THROWS_AS(VegetationMap::from_csv(bad), DataError);
    }
    SUBCASE("a duplicate category is refused") {
        std::ostringstream dup;
        dup << "veg_category,group\n";
        for (int c = 1; c <= 28; ++c) dup << c << ",1\n";
        dup << "7,2\n";
        std::istringstream bad(dup.str());
        CHECK_THROWS_AS(VegetationMap::from_csv(bad), DataError);
    }
    SUBCASE("an out-of-range group is refused") {
        std::ostringstream g7;
        g7 << "veg_category,group\n";
        for (int c = 1; c <= 28; ++c) g7 << c << "," << (c == 9 ? 7 : 1) << "\n";
        std::istringstream bad(g7.str());
        CHECK_THROWS_AS(VegetationMap::from_csv(bad), DataError);
    }
}

namespace {

// Hour grid covering the trailing 30 days before `end_hour`, one observation
// per hour, value = f(hour).
template <typename F>
HourlySeries grid_series(long long end_hour, F f) {
    HourlySeries s;
    for (long long h = end_hour - 720; h < end_hour; ++h) s.push_back({h, f(h)});
    return s;
}

}  // namespace

TEST_CASE("weather windows: identity series has arithmetic-mean windows") {
    const Date discovery{1970, 2, 1};
    const long long end = days_from_civil(discovery) * 24;  // 744
    REQUIRE(end == 744);
    WeatherSeries ws;
    ws.temperature = grid_series(end, [](long long h) { return static_cast<double>(h); });
    ws.wind_speed = grid_series(end, [](long long h) { return 0.25 * h; });
    ws.humidity = grid_series(end, [](long long) { return 55.0; });
    ws.precipitation = grid_series(end, [](long long h) { return (h % 2) * 2.0; });

    const auto out = aggregate_weather(ws, discovery);
    // mean of consecutive integers [end-n, end) is end - n + (n-1)/2
    CHECK(out[0] == doctest::Approx(oracle::arithmetic_mean(end - 168, 1, 168)).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(oracle::arithmetic_mean(end - 360, 1, 360)).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(oracle::arithmetic_mean(end - 720, 1, 720)).epsilon(1e-12));
    CHECK(out[3] == doctest::Approx(0.25 * oracle::arithmetic_mean(end - 168, 1, 168)).epsilon(1e-12));
    CHECK(out[6] == 55.0);
    CHECK(out[7] == 55.0);
    CHECK(out[8] == 55.0);
    CHECK(out[9] == doctest::Approx(1.0).epsilon(1e-12));  // alternating 0/2
}

TEST_CASE("weather windows: the endpoint is exclusive and the start inclusive") {
    const Date discovery{1970, 2, 1};
    const long long end = days_from_civil(discovery) * 24;  // 744
    WeatherSeries ws;
    // Full coverage at 1.0, except the first hour of the 7-day window holds
    // 169 and the (excluded) discovery hour itself holds 99. Including the
    // start hour makes the 7-day mean exactly (167 * 1 + 169) / 168 = 2;
    // including the end hour would drag it toward 99.
    ws.temperature =
        grid_series(end, [&](long long h) { return h == end - 168 ? 169.0 : 1.0; });
    ws.temperature.push_back({end, 99.0});
    ws.wind_speed = grid_series(end, [](long long) { return 1.0; });
    ws.humidity = grid_series(end, [](long long) { return 50.0; });
    ws.precipitation = grid_series(end, [](long long) { return 0.0; });
    const auto out = aggregate_weather(ws, discovery);
    CHECK(out[0] == 2.0);
}

TEST_CASE("weather windows: missing hours shrink the mean but half coverage still works") {
    const Date discovery{1970, 2, 1};
    const long long end = days_from_civil(discovery) * 24;
    WeatherSeries ws;
    // every second hour observed over the whole 30 days: exactly half missing
    for (long long h = end - 720; h < end; h += 2) {
        ws.temperature.push_back({h, 20.0});
        ws.wind_speed.push_back({h, 5.0});
        ws.humidity.push_back({h, 40.0});
        ws.precipitation.push_back({h, 0.5});
    }
    const auto out = aggregate_weather(ws, discovery);
    CHECK(out[0] == 20.0);
    CHECK(out[11] == 0.5);
}

TEST_CASE("weather windows: over half missing is refused naming the window") {
    const Date discovery{1970, 2, 1};
    const long long end = days_from_civil(discovery) * 24;
    WeatherSeries ws;
    // 7-day window: only 60 of 168 hours present (64% missing)
    for (long long h = end - 60; h < end; ++h) ws.temperature.push_back({h, 20.0});
    ws.wind_speed = grid_series(end, [](long long) { return 5.0; });
    ws.humidity = grid_series(end, [](long long) { return 40.0; });
    ws.precipitation = grid_series(end, [](long long) { return 0.5; });
    CHECK_THROWS_WITH_AS(aggregate_weather(ws, discovery), doctest::Contains("7-day"),
                         DataError);
}

TEST_CASE("weather series invariants") {
    const Date discovery{1970, 2, 1};
    const long long end = days_from_civil(discovery) * 24;
    WeatherSeries good;
    good.temperature = grid_series(end, [](long long) { return 20.0; });
    good.wind_speed = grid_series(end, [](long long) { return 5.0; });
    good.humidity = grid_series(end, [](long long) { return 40.0; });
    good.precipitation = grid_series(end, [](long long) { return 0.5; });

    SUBCASE("non-increasing timestamps") {
        WeatherSeries ws = good;
        ws.temperature[10] = ws.temperature[9];
        CHECK_THROWS_AS(aggregate_weather(ws, discovery), DataError);
    }
    SUBCASE("humidity off the percent scale") {
        WeatherSeries ws = good;
        ws.humidity[3].second = 100.5;
        CHECK_THROWS_AS(aggregate_weather(ws, discovery), DataError);
        ws.humidity[3].second = -0.5;
        CHECK_THROWS_AS(aggregate_weather(ws, discovery), DataError);
    }
    SUBCASE("negative precipitation") {
        WeatherSeries ws = good;
        ws.precipitation[3].second = -0.1;
        CHECK_THROWS_AS(aggregate_weather(ws, discovery), DataError);
    }
    SUBCASE("non-finite observation") {
        WeatherSeries ws = good;
        ws.temperature[3].second = std::nan("");
        CHECK_THROWS_AS(aggregate_weather(ws, discovery), DataError);
    }
}

TEST_CASE("pgm round-trip is exact") {
    const fs::path dir = temp_dir("wf_pgm_test");
    std::vector<double> values;
    for (int i = 0; i < 12; ++i) values.push_back(static_cast<double>(i * 20) / 255.0);
    const std::string path = (dir / "img.pgm").string();
    write_pgm(path, 4, 3, values);
    GrayImage img = read_gray(path);
    CHECK(img.width == 4);
    CHECK(img.height == 3);
    REQUIRE(img.pixels.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) CHECK(img.pixels[i] == values[i]);
    fs::remove_all(dir);
}

TEST_CASE("pgm writer clamps and rounds") {
    const fs::path dir = temp_dir("wf_pgm_clamp_test");
    const std::string path = (dir / "img.pgm").string();
    write_pgm(path, 3, 1, {-0.5, 0.5, 1.5});
    GrayImage img = read_gray(path);
    CHECK(img.pixels[0] == 0.0);
    CHECK(img.pixels[1] == doctest::Approx(128.0 / 255.0));  // round(127.5) away from zero
    CHECK(img.pixels[2] == 1.0);
    fs::remove_all(dir);
}

TEST_CASE("malformed pgm containers") {
    const fs::path dir = temp_dir("wf_pgm_bad_test");
    auto write_file = [&](const char* name, const std::string& bytes) {
        std::ofstream f(dir / name, std::ios::binary);
        f << bytes;
        return (dir / name).string();
    };
    CHECK_THROWS_AS(read_gray(write_file("p2.pgm", "P2\n2 2\n255\n0 0 0 0\n")), ParseError);
    CHECK_THROWS_AS(read_gray(write_file("deep.pgm", "P5\n2 2\n65535\n")), ParseError);
    CHECK_THROWS_AS(read_gray(write_file("short.pgm", std::string("P5\n4 4\n255\n") +
                                                          std::string(7, '\0'))),
                    ParseError);
    CHECK_THROWS_AS(read_gray(write_file("noise.txt", "hello")), ParseError);
    CHECK_THROWS_AS(read_gray((dir / "absent.pgm").string()), ParseError);
    // comments in the header are fine
    GrayImage ok = read_gray(write_file("ok.pgm", std::string("P5 # comment\n# more\n2 1\n255\n") +
                                                      std::string("\x10\x20", 2)));
    CHECK(ok.width == 2);
    CHECK(ok.pixels[0] == doctest::Approx(16.0 / 255.0));
    fs::remove_all(dir);
}

namespace {

const unsigned char kGrayPng[] = {
    137, 80, 78, 71, 13, 10, 26, 10, 0, 0, 0, 13, 73, 72, 68, 82, 0, 0, 0, 4, 0, 0, 0, 3,
    8, 0, 0, 0, 0, 145, 159, 241, 26, 0, 0, 0, 23, 73, 68, 65, 84, 120, 156, 99, 96, 80,
    245, 202, 103, 224, 54, 8, 173, 98, 16, 179, 78, 104, 5, 0, 19, 141, 3, 31, 78, 163,
    130, 98, 0, 0, 0, 0, 73, 69, 78, 68, 174, 66, 96, 130};

const unsigned char kRgbPng[] = {
    137, 80, 78, 71, 13, 10, 26, 10, 0, 0, 0, 13, 73, 72, 68, 82, 0, 0, 0, 2, 0, 0, 0, 2,
    8, 2, 0, 0, 0, 253, 212, 154, 115, 0, 0, 0, 22, 73, 68, 65, 84, 120, 156, 99, 56, 145,
    98, 196, 240, 159, 129, 225, 255, 255, 255, 92, 34, 114, 0, 41, 88, 5, 151, 163, 52,
    181, 145, 0, 0, 0, 0, 73, 69, 78, 68, 174, 66, 96, 130};

std::string dump_bytes(const fs::path& p, const unsigned char* data, std::size_t len) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
    return p.string();
}

}  // namespace

TEST_CASE("png decoding: 8-bit gray, exact values") {
    const fs::path dir = temp_dir("wf_png_test");
    GrayImage img = read_gray(dump_bytes(dir / "g.png", kGrayPng, sizeof(kGrayPng)));
    CHECK(img.width == 4);
    CHECK(img.height == 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(img.pixels[static_cast<std::size_t>(y * 4 + x)] ==
                  doctest::Approx(((x * 37 + y * 11) % 256) / 255.0).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("png decoding: color reduces by the 0.299/0.587/0.114 weights") {
    const fs::path dir = temp_dir("wf_png_rgb_test");
    GrayImage img = read_gray(dump_bytes(dir / "c.png", kRgbPng, sizeof(kRgbPng)));
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    auto luma = [](double r, double g, double b) {
        return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    };
    CHECK(img.pixels[0] == doctest::Approx(luma(200, 100, 50)).epsilon(1e-9));
    CHECK(img.pixels[1] == doctest::Approx(luma(0, 255, 0)).epsilon(1e-9));
    CHECK(img.pixels[2] == doctest::Approx(luma(255, 255, 255)).epsilon(1e-9));
    CHECK(img.pixels[3] == doctest::Approx(luma(10, 20, 30)).epsilon(1e-9));
    fs::remove_all(dir);
}

TEST_CASE("png decoding: a corrupt stream is a parse error") {
    const fs::path dir = temp_dir("wf_png_bad_test");
    std::vector<unsigned char> bytes(kGrayPng, kGrayPng + sizeof(kGrayPng));
    bytes[40] ^= 0xff;  // corrupt the IDAT payload
    CHECK_THROWS_AS(read_gray(dump_bytes(dir / "bad.png", bytes.data(), bytes.size())),
                    ParseError);
    fs::remove_all(dir);
}

TEST_CASE("model-facing loader enforces 100x100") {
    const fs::path dir = temp_dir("wf_tile_test");
    std::vector<double> big(100 * 100, 0.5);
    const std::string ok = (dir / "t.pgm").string();
    write_pgm(ok, 100, 100, big);
    CHECK(load_gray_image(ok).width == 100);

    const std::string small = (dir / "s.pgm").string();
    write_pgm(small, 4, 3, std::vector<double>(12, 0.5));
    CHECK_THROWS_AS(load_gray_image(small), DimensionError);
    fs::remove_all(dir);
}

TEST_CASE("plain split: sizes, disjointness, determinism") {
    SplitPlan p = plain_split(100, 0.2, 7);
    CHECK(p.train.size() == 80);
    CHECK(p.test.size() == 20);
    std::set<std::size_t> all(p.train.begin(), p.train.end());
    all.insert(p.test.begin(), p.test.end());
    CHECK(all.size() == 100);
    CHECK(*all.rbegin() == 99);

    SplitPlan q = plain_split(100, 0.2, 7);
    CHECK(p.train == q.train);
    CHECK(p.test == q.test);
    SplitPlan r = plain_split(100, 0.2, 8);
    CHECK(p.train != r.train);

    CHECK_THROWS_AS(plain_split(1, 0.2, 7), DataError);
    CHECK_THROWS_AS(plain_split(100, 0.0, 7), ConfigError);
    CHECK_THROWS_AS(plain_split(100, 1.0, 7), ConfigError);
}

TEST_CASE("undersample: the documented population arithmetic") {
    // 29550 rows, 4717 of them minority; 1:1.8 keeps 8490 majority rows,
    // the pool of 13207 splits 10565/2642, and the 16343 spare majority rows
    // land in the test side for 18985 total
    std::vector<int> labels(29550, 0);
    for (int i = 0; i < 4717; ++i) labels[static_cast<std::size_t>(i * 6)] = 1;
    SplitPlan p = undersample(labels, 1.8, 0.2, 42);
    CHECK(p.train.size() == 10565);
    CHECK(p.test.size() == 18985);
    CHECK(p.method == "undersample");

    std::size_t train_minority = 0;
    for (std::size_t i : p.train) train_minority += labels[i] == 1;
    std::size_t test_minority = 0;
    for (std::size_t i : p.test) test_minority += labels[i] == 1;
    CHECK(train_minority + test_minority == 4717);

    // pool minority fraction
    const double fraction = 4717.0 / 13207.0;
    CHECK(std::abs(fraction - 0.3572) < 1e-4);

    // no row appears twice, and spare majority rows sit at the tail ascending
    std::set<std::size_t> seen(p.train.begin(), p.train.end());
    seen.insert(p.test.begin(), p.test.end());
    CHECK(seen.size() == p.train.size() + p.test.size());
    const std::size_t spare = 24833 - 8490;
    REQUIRE(p.test.size() >= spare);
    for (std::size_t i = p.test.size() - spare + 1; i < p.test.size(); ++i)
        CHECK(p.test[i] > p.test[i - 1]);
}

TEST_CASE("undersample: conservation and determinism over odd sizes") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40 + static_cast<int>(rng.below(300));
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        const int minority = 5 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n / 3)));
        for (int i = 0; i < minority; ++i) labels[static_cast<std::size_t>(i)] = 1;
        Rng sh(trial);
        sh.shuffle(labels);

        const double ratio = 1.0 + 0.1 * static_cast<double>(rng.below(15));
        const std::size_t keep =
            static_cast<std::size_t>(static_cast<double>(minority) * ratio);
        if (keep > static_cast<std::size_t>(n - minority)) {
            CHECK_THROWS_AS(undersample(labels, ratio, 0.25, trial), DataError);
            continue;
        }
        SplitPlan p = undersample(labels, ratio, 0.25, trial);
        const std::size_t pool = static_cast<std::size_t>(minority) + keep;
        CHECK(p.train.size() == static_cast<std::size_t>(0.75 * static_cast<double>(pool)));
        CHECK(p.train.size() + p.test.size() ==
              pool + (static_cast<std::size_t>(n - minority) - keep));
        std::set<std::size_t> seen(p.train.begin(), p.train.end());
        seen.insert(p.test.begin(), p.test.end());
        CHECK(seen.size() == p.train.size() + p.test.size());

        SplitPlan q = undersample(labels, ratio, 0.25, trial);
        CHECK(p.train == q.train);
        CHECK(p.test == q.test);
    }
}

TEST_CASE("undersample input validation") {
    CHECK_THROWS_AS(undersample({1, 1, 1}, 1.0, 0.2, 1), DataError);     // single class
    CHECK_THROWS_AS(undersample({0, 2, 1}, 1.0, 0.2, 1), DataError);     // non-binary
    CHECK_THROWS_AS(undersample({}, 1.0, 0.2, 1), DataError);            // empty
    std::vector<int> labels = {1, 1, 0, 0, 0};
    CHECK_THROWS_AS(undersample(labels, 2.0, 0.2, 1), DataError);        // needs 4 majority
    CHECK_THROWS_AS(undersample(labels, -1.0, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(undersample(labels, 1.0, 1.5, 1), ConfigError);
}

TEST_CASE("smote_combine: the two interpolation modes") {
    const std::vector<double> x = {0.0, 0.0};
    const std::vector<double> xn = {2.0, -2.0};
    const auto standard = smote_combine(x, xn, 0.5, SmoteMode::Standard);
    CHECK(standard[0] == 1.0);
    CHECK(standard[1] == -1.0);
    const auto literal = smote_combine(x, xn, 0.5, SmoteMode::PaperLiteral);
    CHECK(literal[0] == 1.0);
    CHECK(literal[1] == 1.0);  // the magnitude form loses the sign
    CHECK_THROWS_AS(smote_combine(x, {1.0}, 0.5, SmoteMode::Standard), DimensionError);
}

TEST_CASE("smote: synthetic rows stay on minority segments") {
    std::vector<std::vector<double>> minority = {{0, 0}, {1, -1}, {4, 2}, {5, 5}, {-3, 1}};
    auto rows = smote(minority, 2, 200, 9, SmoteMode::Standard);
    REQUIRE(rows.size() == 200);
    for (const auto& r : rows) {
        bool on_some_segment = false;
        for (std::size_t i = 0; i < minority.size() && !on_some_segment; ++i)
            for (std::size_t j = 0; j < minority.size(); ++j) {
                if (j == i) continue;
                // solve r = a + u (b - a) on the first coordinate, verify the rest
                const double dx = minority[j][0] - minority[i][0];
                if (dx == 0.0) continue;
                const double u = (r[0] - minority[i][0]) / dx;
                if (u < 0.0 || u >= 1.0) continue;
                const double y = minority[i][1] + u * (minority[j][1] - minority[i][1]);
                if (std::abs(y - r[1]) < 1e-9) {
                    on_some_segment = true;
                    break;
                }
            }
        CHECK(on_some_segment);
    }
    // determinism
    auto again = smote(minority, 2, 200, 9, SmoteMode::Standard);
    CHECK(rows == again);
}

TEST_CASE("smote: neighbor choice is the true nearest with ties to lower index") {
    // points on a line: nearest of 10 is 1 (distance 9) not 0 (distance 10)
    std::vector<std::vector<double>> minority = {{0.0}, {1.0}, {10.0}};
    auto rows = smote(minority, 1, 300, 10, SmoteMode::Standard);
    for (const auto& r : rows) {
        const double v = r[0];
        // allowed segments: [0,1] (from 0 or 1) and [10 -> 1] = (1, 10]
        CHECK(v >= 0.0);
        CHECK(v <= 10.0);
    }
    // at least one draw must have started from the isolated point 10 and
    // produced something strictly between 1 and 10
    bool interior = false;
    for (const auto& r : rows) interior = interior || (r[0] > 1.0 && r[0] < 10.0);
    CHECK(interior);
}

TEST_CASE("smote input validation") {
    std::vector<std::vector<double>> minority = {{0.0}, {1.0}, {2.0}};
    CHECK_THROWS_AS(smote(minority, 3, 5, 1), DataError);   // k >= minority size
    CHECK_THROWS_AS(smote(minority, 0, 5, 1), ConfigError);
    CHECK_THROWS_AS(smote(minority, 1, -1, 1), ConfigError);
    CHECK_THROWS_AS(smote({{0.0}, {1.0, 2.0}}, 1, 1, 1), DimensionError);
    CHECK(smote(minority, 1, 0, 1).empty());
}

TEST_CASE("dataset assembly: column order, widths, labels, ids") {
    std::ostringstream os;
    os << kHeader << "\n" << row(100, "2015-08-02", 1, 11) << "\n"
       << row(200, "2016-01-31", 4, 24) << "\n";
    std::istringstream in(os.str());
    ParseResult parsed = parse_records(in);
    VegetationMap veg = VegetationMap::defaults();

    Dataset bare = assemble_dataset(parsed.rows, veg, /*include_vegetation=*/false);
    CHECK(bare.width == 14);
    CHECK(bare.features.shape() == Shape{2, 14});
    CHECK(bare.features[0] == doctest::Approx(40.1));
    CHECK(bare.features[1] == doctest::Approx(-120.5));
    for (int i = 0; i < 12; ++i)
        CHECK(bare.features[static_cast<std::size_t>(2 + i)] ==
              doctest::Approx((i + 1) * 0.5));
    CHECK(bare.labels == std::vector<int>{1, 0});
    CHECK(bare.ids == std::vector<long long>{100, 200});
    CHECK(!bare.has_images);

    Dataset full = assemble_dataset(parsed.rows, veg, /*include_vegetation=*/true);
    CHECK(full.width == 20);
    CHECK(full.features.shape() == Shape{2, 20});
    // veg 11 -> group 3: one-hot block starts at column 14
    CHECK(full.features[14 + 2] == 1.0);
    CHECK(full.features[14 + 0] == 0.0);
    // second row veg 24 -> group 5
    CHECK(full.features[20 + 14 + 4] == 1.0);
}

TEST_CASE("dataset assembly: image joins by fod id, missing tiles reported together") {
    const fs::path dir = temp_dir("wf_join_test");
    std::ostringstream os;
    os << kHeader << "\n" << row(100, "2015-08-02", 1, 11) << "\n"
       << row(200, "2016-01-31", 4, 24) << "\n";
    std::istringstream in(os.str());
    ParseResult parsed = parse_records(in);
    VegetationMap veg = VegetationMap::defaults();

    std::vector<double> px(100 * 100, 0.25);
    write_pgm((dir / "100.pgm").string(), 100, 100, px);

    CHECK_THROWS_WITH_AS(
        assemble_dataset(parsed.rows, veg, true, true, dir.string()),
        doctest::Contains("200"), DataError);

    write_pgm((dir / "200.pgm").string(), 100, 100, px);
    Dataset ds = assemble_dataset(parsed.rows, veg, true, true, dir.string());
    CHECK(ds.has_images);
    CHECK(ds.images.shape() == Shape{2, 1, 100, 100});
    // 0.25 quantizes to gray 64 on write, so the reload sees 64/255
    CHECK(ds.images[0] == 64.0 / 255.0);
    fs::remove_all(dir);
}

TEST_CASE("standardizer: train statistics, constant columns, identity") {
    Tensor x({4, 3}, {1, 10, 5, 2, 10, 5, 3, 10, 5, 4, 10, 5});
    Standardizer s = Standardizer::fit(x);
    REQUIRE(s.mean.size() == 3);
    CHECK(s.mean[0] == 2.5);
    CHECK(s.mean[1] == 10.0);
    CHECK(s.stdev[1] == 1.0);  // constant column passes through
    CHECK(s.stdev[2] == 1.0);

    Tensor z = s.apply(x);
    double mean0 = 0, var0 = 0;
    for (int r = 0; r < 4; ++r) mean0 += z[static_cast<std::size_t>(r * 3)];
    mean0 /= 4;
    for (int r = 0; r < 4; ++r) {
        const double d = z[static_cast<std::size_t>(r * 3)] - mean0;
        var0 += d * d;
    }
    var0 /= 4;
    CHECK(mean0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var0 == doctest::Approx(1.0).epsilon(1e-12));
    for (int r = 0; r < 4; ++r) {
        CHECK(z[static_cast<std::size_t>(r * 3 + 1)] == 0.0);
        CHECK(z[static_cast<std::size_t>(r * 3 + 2)] == 0.0);
    }

    Standardizer id = Standardizer::identity(3);
    Tensor same = id.apply(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);

    CHECK_THROWS_AS(s.apply(Tensor({2, 4})), DimensionError);
}

TEST_CASE("synthetic corpus round-trips through the csv schema") {
    SyntheticCorpus corpus = synthetic_corpus(30, 5);
    REQUIRE(corpus.rows.size() == 30);
    REQUIRE(corpus.tiles.size() == 30);
    for (std::size_t i = 0; i < corpus.rows.size(); ++i) {
        CHECK(is_natural_cause(corpus.rows[i].record.cause_code) == (i % 3 == 0));
        CHECK(corpus.tiles[i].source_id == corpus.rows[i].record.fod_id);
        CHECK(corpus.tiles[i].width == 100);
    }

    std::ostringstream os;
    write_corpus_csv(os, corpus.rows);
    std::istringstream in(os.str());
    ParseResult parsed = parse_records(in);
    CHECK(parsed.dropped == 0);
    REQUIRE(parsed.rows.size() == 30);
    for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
        CHECK(parsed.rows[i].record.fod_id == corpus.rows[i].record.fod_id);
        CHECK(parsed.rows[i].record.discovery_date == corpus.rows[i].record.discovery_date);
        for (int w = 0; w < 12; ++w)
            CHECK(parsed.rows[i].weather[static_cast<std::size_t>(w)] ==
                  doctest::Approx(corpus.rows[i].weather[static_cast<std::size_t>(w)])
                      .epsilon(1e-9));
    }

    // natural rows run hotter and drier than the rest
    double nat_temp = 0, other_temp = 0;
    int nat = 0, other = 0;
    for (const auto& r : corpus.rows) {
        if (is_natural_cause(r.record.cause_code)) {
            nat_temp += r.weather[0];
            ++nat;
        } else {
            other_temp += r.weather[0];
            ++other;
        }
    }
    CHECK(nat_temp / nat > other_temp / other + 5.0);
}

TEST_CASE("separable task is balanced and actually separable") {
    TabularTask task = separable_tabular(40, 6, 9);
    CHECK(task.x.shape() == Shape{40, 6});
    int pos = 0;
    for (int y : task.y) pos += y;
    CHECK(pos == 20);
}
