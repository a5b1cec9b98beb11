#include "spikesim/spike_tensor.hpp"

#include <bit>

namespace spikesim {

SpikeTensor::SpikeTensor(int c, int h, int w)
        : channels(c)
        , height(h)
        , width(w)
{
    SPIKESIM_REQUIRE(c >= 0 && h >= 0 && w >= 0, "negative spike tensor dimension");
    words.assign(static_cast<size_t>((size() + 63) / 64), 0);
}

int64_t SpikeTensor::total_spikes() const
{
    int64_t n = 0;
    for (uint64_t w : words) {
        n += std::popcount(w);
    }
    return n;
}

SpikeTensor SpikeTensor::channel_slice(int c) const
{
    SpikeTensor out(1, height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out.set(0, y, x, get(c, y, x));
        }
    }
    return out;
}

int64_t total_spikes(const SpikeTensor &t)
{
    return t.total_spikes();
}

} // namespace spikesim
