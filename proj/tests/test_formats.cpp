#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lossrobust/csv.hpp"
#include "lossrobust/rng.hpp"
#include "lossrobust/svg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

using namespace lossrobust;

namespace {

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("doubles survive the shortest round-trip form") {
    Rng rng(314159);
    for (int t = 0; t < 2000; ++t) {
        double v;
        switch (t % 4) {
        case 0: v = rng.uniform(-1e6, 1e6); break;
        case 1: v = std::exp(rng.uniform(-300.0, 300.0)); break;
        case 2: v = rng.normal() * 1e-9; break;
        default: v = static_cast<double>(static_cast<long>(rng.uniform(-1e9, 1e9)));
        }
        CHECK(parse_double(format_double(v)) == v);
    }

    CHECK(format_double(0.0) == "0");
    CHECK(format_double(2.5) == "2.5");
    CHECK(format_double(-1.0) == "-1");
    CHECK(parse_double("1e-300") == 1e-300);
    CHECK(parse_double("42") == 42.0);

    CHECK_THROWS_AS(parse_double(""), std::runtime_error);
    CHECK_THROWS_AS(parse_double("abc"), std::runtime_error);
    CHECK_THROWS_AS(parse_double("1.5x"), std::runtime_error);
    CHECK_THROWS_AS(parse_double("1.5 "), std::runtime_error);
}

TEST_CASE("field splitting keeps empty cells") {
    auto f = split_fields("a,b,c");
    REQUIRE(f.size() == 3);
    CHECK(f[0] == "a");
    CHECK(f[2] == "c");

    f = split_fields("x,,z,");
    REQUIRE(f.size() == 4);
    CHECK(f[1] == "");
    CHECK(f[3] == "");

    f = split_fields("");
    REQUIRE(f.size() == 1);
    CHECK(f[0] == "");

    f = split_fields("1;2;3", ';');
    REQUIRE(f.size() == 3);
    CHECK(f[1] == "2");
}

TEST_CASE("svg chart renders one polyline per series") {
    svg::Panel panel;
    panel.title = "alpha sweep";
    panel.series.push_back({"methodA", {{0.0, 1.0}, {1.0, 2.0}}});

    std::string out = svg::render({panel}, "demo", "alpha", "value");
    CHECK(out.rfind("<?xml", 0) == 0);
    CHECK(out.find("<svg") != std::string::npos);
    CHECK(out.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(out, "<polyline") == 1);
    CHECK(out.find("alpha sweep") != std::string::npos);
    CHECK(out.find("methodA") != std::string::npos);
    CHECK(out.find("demo") != std::string::npos);
    CHECK(out.find("alpha") != std::string::npos);
    CHECK(out.find("value") != std::string::npos);

    // Determinism: identical input must produce identical bytes.
    CHECK(svg::render({panel}, "demo", "alpha", "value") == out);

    svg::Panel second;
    second.title = "n sweep";
    second.series.push_back({"methodA", {{0.0, 3.0}, {1.0, 1.0}}});
    second.series.push_back({"methodB", {{0.0, 2.0}, {0.5, 2.5}, {1.0, 2.0}}});
    std::string two = svg::render({panel, second}, "demo", "alpha", "value");
    CHECK(count_occurrences(two, "<polyline") == 3);
    CHECK(two.find("n sweep") != std::string::npos);
    CHECK(two.find("methodB") != std::string::npos);

    CHECK_THROWS_AS(svg::render({}, "t", "x", "y"), std::invalid_argument);
    svg::Panel empty;
    empty.title = "empty";
    CHECK_THROWS_AS(svg::render({empty}, "t", "x", "y"), std::invalid_argument);
}

TEST_CASE("svg chart handles degenerate data ranges") {
    // A single point or a flat series must not divide by a zero span.
    svg::Panel flat;
    flat.title = "flat";
    flat.series.push_back({"s", {{2.0, 5.0}, {2.0, 5.0}}});
    std::string out = svg::render({flat}, "t", "x", "y");
    CHECK(out.find("</svg>") != std::string::npos);
    for (char c : out) CHECK(c != '\0');
    CHECK(out.find("nan") == std::string::npos);
    CHECK(out.find("inf") == std::string::npos);
}
