#include "support.hpp"

#include "tactile/errors.hpp"
#include "tactile/sensor_stream.hpp"
#include "tactile/synth_bench.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstring>
#include <sstream>

using namespace tactile;

namespace {

std::string to_text(const Recording& rec)
{
    std::ostringstream out;
    write_recording(out, rec);
    return out.str();
}

Recording from_text(const std::string& text)
{
    std::istringstream in(text);
    return read_recording(in);
}

}  // namespace

TEST_CASE("recording round trip keeps header and 250 ticks")
{
    std::mt19937_64 rng(3);
    Recording rec = test::flat_recording(250);
    for (Tick& t : rec.ticks) {
        t.vibration = test::random_samples(rng, 22);
        t.flux = test::random_samples(rng, 1)[0];
    }
    rec.header.material_label = "cork";
    const Recording back = from_text(to_text(rec));
    CHECK(back.header.vibration_rate == 2200);
    CHECK(back.header.lowrate == 100);
    CHECK(back.header.electrode_count == 19);
    CHECK(back.ticks.size() == 250);
    CHECK(back == rec);
}

TEST_CASE("short vibration row names the tick")
{
    const std::string text = to_text(test::flat_recording(20));
    std::istringstream in(text);
    std::ostringstream broken;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (n == 8) {  // header is line 0, so this is tick 7
            line = line.substr(line.find(',') + 1);
        }
        broken << line << '\n';
        ++n;
    }
    try {
        from_text(broken.str());
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("tick 7: expected 22 vibration samples") != std::string::npos);
    }
}

TEST_CASE("synthetic recording reloads bit-identical")
{
    const BenchSuite suite = default_suite(42);
    const Recording rec = synth_recording(suite.specs[0], 2.0, 42);
    const std::string a = to_text(rec);
    const Recording back = from_text(a);
    CHECK(back == rec);
    CHECK(to_text(back) == a);
}

TEST_CASE("format_double round-trips random doubles")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 10000; ++i) {
        double v;
        const std::uint64_t b = bits(rng);
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) {
            continue;
        }
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("header validation")
{
    Recording rec = test::flat_recording(5);
    rec.header.vibration_rate = 2150;
    CHECK_THROWS_AS(rec.validate(), FormatError);
    rec = test::flat_recording(5);
    rec.header.electrode_radii[3] = 0.0;
    CHECK_THROWS_AS(rec.validate(), FormatError);
    rec = test::flat_recording(5);
    rec.ticks[2].electrodes.pop_back();
    CHECK_THROWS_AS(rec.validate(), FormatError);
}

TEST_CASE("missing resting levels are calibrated from the leading span")
{
    Recording rec = test::flat_recording(100);
    for (std::size_t k = 0; k < rec.ticks.size(); ++k) {
        for (double& e : rec.ticks[k].electrodes) {
            e = k < 50 ? 2000.0 + static_cast<double>(k % 2) : 1500.0;
        }
    }
    rec.header.calibration_seconds = 0.5;
    // Drop the resting levels from the header line to mimic a raw capture.
    std::string text = to_text(rec);
    auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
    header.erase("electrode_resting");
    const std::string body = text.substr(text.find('\n'));
    const Recording back = from_text(header.dump() + body);
    REQUIRE(back.header.electrode_resting.size() == 19);
    CHECK(back.header.electrode_resting[0] == doctest::Approx(2000.5).epsilon(1e-12));
    CHECK(back.data_ticks().size() == 50);

    header.erase("calibration_seconds");
    CHECK_THROWS_AS(from_text(header.dump() + body), FormatError);
}

TEST_CASE("windowing drops the remainder")
{
    const Recording r250 = test::flat_recording(250);
    const auto w = windows(r250.ticks, r250.header, 0.25);
    CHECK(w.size() == 10);
    for (const auto& win : w) {
        CHECK(win.ticks().size() == 25);
        CHECK(win.vibration().size() == 550);
        CHECK(win.flux().size() == 25);
        CHECK(win.duration() == doctest::Approx(0.25));
    }
    const Recording r24 = test::flat_recording(24);
    CHECK(windows(r24.ticks, r24.header, 0.25).empty());
    const Recording r60 = test::flat_recording(60);
    const auto w60 = windows(r60.ticks, r60.header, 0.25);
    CHECK(w60.size() == 2);
    CHECK(w60.back().ticks().data() + 25 == r60.ticks.data() + 50);
}

TEST_CASE("window length must be a whole number of ticks")
{
    const Recording rec = test::flat_recording(10);
    CHECK_THROWS_AS(ticks_per_window(rec.header, 0.255), ParameterError);
    CHECK_THROWS_AS(ticks_per_window(rec.header, 0.0), ParameterError);
    CHECK(ticks_per_window(rec.header, 0.1) == 10);
}

TEST_CASE("property: windows are contiguous and in order")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> len(0, 400);
    std::uniform_int_distribution<int> tpw(1, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const Recording rec = test::flat_recording(len(rng));
        const int k = tpw(rng);
        const double dt = static_cast<double>(k) / 100.0;
        const auto w = windows(rec.ticks, rec.header, dt);
        REQUIRE(w.size() == rec.ticks.size() / static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(w[i].ticks().data() == rec.ticks.data() + i * static_cast<std::size_t>(k));
        }
    }
}
