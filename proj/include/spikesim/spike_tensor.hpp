#pragma once

#include <cstdint>
#include <vector>

#include "spikesim/errors.hpp"

namespace spikesim {

// Binary activation map, row-major [c][h][w], bit-packed into 64-bit words.
// Trailing bits of the last word are kept zero so equality can compare words.
struct SpikeTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<uint64_t> words;

    SpikeTensor() = default;
    SpikeTensor(int c, int h, int w);

    int64_t size() const
    {
        return static_cast<int64_t>(channels) * height * width;
    }

    int64_t flat_index(int c, int y, int x) const
    {
        SPIKESIM_REQUIRE(c >= 0 && c < channels && y >= 0 && y < height && x >= 0 && x < width,
                "spike tensor index out of range");
        return (static_cast<int64_t>(c) * height + y) * width + x;
    }

    bool get(int c, int y, int x) const
    {
        int64_t i = flat_index(c, y, x);
        return (words[i >> 6] >> (i & 63)) & 1u;
    }

    void set(int c, int y, int x, bool v)
    {
        int64_t i = flat_index(c, y, x);
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v) {
            words[i >> 6] |= mask;
        } else {
            words[i >> 6] &= ~mask;
        }
    }

    int64_t total_spikes() const;
    SpikeTensor channel_slice(int c) const;

    bool same_shape(const SpikeTensor &o) const
    {
        return channels == o.channels && height == o.height && width == o.width;
    }

    bool operator==(const SpikeTensor &) const = default;
};

// Number of 1-bits in the map.
int64_t total_spikes(const SpikeTensor &t);

} // namespace spikesim
