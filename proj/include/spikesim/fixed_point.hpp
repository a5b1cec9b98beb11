#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "spikesim/errors.hpp"

namespace spikesim {

// Signed 8-bit fixed point. A raw value v represents v * 2^-frac_bits.
struct FixedPointFormat {
    static constexpr int total_bits = 8;
    int frac_bits = 4; // in [0, 7]

    bool valid() const { return frac_bits >= 0 && frac_bits <= 7; }

    // Raw encoding of 1.0 in this format.
    int32_t one_raw() const { return 1 << frac_bits; }

    double decode(int8_t raw) const
    {
        return static_cast<double>(raw) * std::ldexp(1.0, -frac_bits);
    }
    double max_value() const { return decode(INT8_MAX); }
    double min_value() const { return decode(INT8_MIN); }

    bool operator==(const FixedPointFormat &) const = default;
};

// Round half away from zero, then saturate into the signed 8-bit range.
int8_t quantize(double value, const FixedPointFormat &format);

// Dense tensor of raw 8-bit two's-complement values, row-major.
struct FixedTensor {
    std::vector<int> shape;
    FixedPointFormat format;
    std::vector<int8_t> values;

    FixedTensor() = default;
    FixedTensor(std::vector<int> shape_, FixedPointFormat fmt);

    int64_t element_count() const
    {
        int64_t n = 1;
        for (int d : shape) {
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    int dim(size_t i) const { return shape.at(i); }

    // [a][b] indexing for 2-d tensors (FC weights: [classes][features]).
    int8_t at2(int a, int b) const
    {
        return values[static_cast<size_t>(a) * shape[1] + b];
    }
    // [a][b][c][d] indexing for 4-d tensors (conv weights: [oc][ic][kh][kw]).
    int8_t at4(int a, int b, int c, int d) const
    {
        size_t idx = ((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d;
        return values[idx];
    }
    int8_t &at4(int a, int b, int c, int d)
    {
        size_t idx = ((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d;
        return values[idx];
    }

    bool operator==(const FixedTensor &) const = default;
};

} // namespace spikesim
