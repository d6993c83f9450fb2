#include "doctest.h"

#include "sobflow/field_io.hpp"
#include "sobflow/profiles.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace sobflow;

TEST_CASE("format_decimal17 round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
        CHECK(std::strtod(format_decimal17(x).c_str(), nullptr) == x);
    }
    CHECK(format_decimal17(0.1) == "0.10000000000000001");
}

TEST_CASE("write_field / read_field is bit exact") {
    const GridPtr g = make_grid(5, 1e4, 128);
    const RadialField f = RadialField::sample(g, [](double r) { return std::pow(1.0 + r * r, -3.5) + 1e-3 * std::sin(r); });
    std::stringstream ss;
    write_field(ss, f);
    const TabulatedField t = read_field(ss);
    CHECK(t.d == 5);
    CHECK(t.r_max == g->r_max());
    REQUIRE(t.r.size() == 128);
    const RadialField back = resample(t, g);
    for (int i = 0; i < g->size(); ++i) {
        CHECK(t.r[static_cast<std::size_t>(i)] == g->node(i));
        CHECK(back[i] == f[i]);
    }
}

TEST_CASE("field files on disk and as a profile") {
    const auto path = (std::filesystem::temp_directory_path() / "sobflow_test_field.txt").string();
    const GridPtr g = make_grid(3, 1e8, 256);
    const RadialField F = RadialField::sample(g, [](double r) { return aubin_talenti(3, r); });
    write_field(path, F);
    const RadialField again = profile(parse_profile("custom_tabulated:path=" + path, 3), g);
    for (int i = 0; i < g->size(); ++i) CHECK(again[i] == F[i]);

    // A different grid goes through interpolation.
    const GridPtr g2 = make_grid(3, 1e8, 300);
    const RadialField interp = profile(parse_profile("custom_tabulated:path=" + path, 3), g2);
    double worst = 0.0;
    for (int i = 0; i < g2->size(); ++i) worst = std::max(worst, std::abs(interp[i] / aubin_talenti(3, g2->node(i)) - 1.0));
    CHECK(worst < 1e-3);
    std::filesystem::remove(path);
}

TEST_CASE("parse errors name the line") {
    auto fails_with = [](const std::string& text, const std::string& fragment) {
        std::istringstream in(text);
        try {
            read_field(in, "f.txt");
        } catch (const ParseError& e) {
            const std::string what = e.what();
            CAPTURE(what);
            CHECK(what.find(fragment) != std::string::npos);
            return;
        }
        FAIL("no ParseError for: " << text);
    };
    fails_with("0 1\n1 2\n", "f.txt:1");
    fails_with("# d=3 n=2 R_max=1\n0 1\n1 abc\n", "f.txt:3");
    fails_with("# d=3 n=2 R_max=1\n0 1 2\n", "f.txt:2");
    fails_with("", "missing header");
    CHECK_THROWS_AS(read_field("/nonexistent/sobflow/field.txt"), ParseError);
}

TEST_CASE("resample refuses a dimension mismatch") {
    std::istringstream in("# d=3 n=2 R_max=1\n0 1\n1 0.5\n");
    const TabulatedField t = read_field(in);
    CHECK_THROWS_AS(resample(t, make_grid(4, 1.0, 32)), std::invalid_argument);
}
