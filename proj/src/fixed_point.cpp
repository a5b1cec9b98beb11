#include "spikesim/fixed_point.hpp"

namespace spikesim {

int8_t quantize(double value, const FixedPointFormat &format)
{
    SPIKESIM_REQUIRE(format.valid(), "invalid fixed-point format");
    // std::round is round-half-away-from-zero.
    double scaled = std::round(value * std::ldexp(1.0, format.frac_bits));
    if (scaled >= static_cast<double>(INT8_MAX)) {
        return INT8_MAX;
    }
    if (scaled <= static_cast<double>(INT8_MIN)) {
        return INT8_MIN;
    }
    return static_cast<int8_t>(scaled);
}

FixedTensor::FixedTensor(std::vector<int> shape_, FixedPointFormat fmt)
        : shape(std::move(shape_))
        , format(fmt)
{
    values.assign(static_cast<size_t>(element_count()), 0);
}

} // namespace spikesim
