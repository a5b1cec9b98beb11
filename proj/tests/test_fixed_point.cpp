#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/fixed_point.hpp"
#include "spikesim/generator.hpp"

using namespace spikesim;

TEST_CASE("quantize maps zero to zero")
{
    CHECK(quantize(0.0, FixedPointFormat{4}) == 0);
}

TEST_CASE("quantize encodes 3/16 as raw 3 with frac 4")
{
    int8_t raw = quantize(3.0 / 16.0, FixedPointFormat{4});
    CHECK(raw == 3);
    CHECK(FixedPointFormat{4}.decode(raw) == doctest::Approx(0.1875));
}

TEST_CASE("quantize saturates instead of wrapping")
{
    CHECK(quantize(100.0, FixedPointFormat{4}) == 127);
    CHECK(quantize(-100.0, FixedPointFormat{4}) == -128);
    CHECK(quantize(1e300, FixedPointFormat{0}) == 127);
    CHECK(quantize(-1e300, FixedPointFormat{7}) == -128);
}

TEST_CASE("quantize rounds half away from zero")
{
    // 0.5 LSB at frac 4 is 1/32.
    CHECK(quantize(1.0 / 32.0, FixedPointFormat{4}) == 1);
    CHECK(quantize(-1.0 / 32.0, FixedPointFormat{4}) == -1);
    CHECK(quantize(3.0 / 32.0, FixedPointFormat{4}) == 2);
    CHECK(quantize(-3.0 / 32.0, FixedPointFormat{4}) == -2);
}

TEST_CASE("quantize-decode round trip is exact for every raw value and format")
{
    for (int frac = 0; frac <= 7; ++frac) {
        FixedPointFormat fmt{frac};
        for (int v = -128; v <= 127; ++v) {
            CHECK(quantize(fmt.decode(static_cast<int8_t>(v)), fmt) == v);
        }
    }
}

TEST_CASE("quantize is monotone non-decreasing")
{
    Rng rng(7);
    FixedPointFormat fmt{4};
    for (int i = 0; i < 2000; ++i) {
        double a = (rng.uniform(-12000, 12000)) / 1000.0;
        double b = (rng.uniform(-12000, 12000)) / 1000.0;
        if (a > b) {
            std::swap(a, b);
        }
        CHECK(quantize(a, fmt) <= quantize(b, fmt));
    }
}

TEST_CASE("format range matches the representable bounds")
{
    FixedPointFormat fmt{4};
    CHECK(fmt.min_value() == doctest::Approx(-8.0));
    CHECK(fmt.max_value() == doctest::Approx(8.0 - 1.0 / 16.0));
    CHECK(fmt.one_raw() == 16);
}
