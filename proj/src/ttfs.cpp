#include "spikesim/ttfs.hpp"

namespace spikesim {

int window_spike_count(const SpikeTensor &map, int channel, int oy, int ox, int window)
{
    SPIKESIM_REQUIRE(window > 0, "window must be positive");
    SPIKESIM_REQUIRE(map.height % window == 0 && map.width % window == 0,
            "window must divide the map dimensions");
    SPIKESIM_REQUIRE(channel >= 0 && channel < map.channels, "channel out of range");
    SPIKESIM_REQUIRE(oy >= 0 && oy < map.height / window && ox >= 0 && ox < map.width / window,
            "window coordinate out of range");
    int count = 0;
    for (int dy = 0; dy < window; ++dy) {
        for (int dx = 0; dx < window; ++dx) {
            count += map.get(channel, oy * window + dy, ox * window + dx);
        }
    }
    return count;
}

TtfsCode w2ttfs_encode(const SpikeTensor &map, int out_h, int out_w)
{
    SPIKESIM_REQUIRE(out_h > 0 && out_w > 0, "output shape must be positive");
    SPIKESIM_REQUIRE(map.height % out_h == 0 && map.width % out_w == 0,
            "output shape must divide the map dimensions");
    int window = map.height / out_h;
    SPIKESIM_REQUIRE(map.width / out_w == window, "window must be square");

    TtfsCode code;
    code.window_sq = window * window;
    code.slots.assign(code.slot_count(), SpikeTensor(map.channels, out_h, out_w));
    for (int c = 0; c < map.channels; ++c) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                int vld_cnt = window_spike_count(map, c, oy, ox, window);
                code.slots[vld_cnt].set(c, oy, ox, true);
            }
        }
    }
    return code;
}

ScoreVector ttfs_fc_exact(const TtfsCode &code, const FixedTensor &fc_weights,
        const ScaleTable &scales)
{
    SPIKESIM_REQUIRE(scales.window_sq == code.window_sq, "scale table does not match the code");
    SPIKESIM_REQUIRE(fc_weights.shape.size() == 2, "fc weights must be 2-d");
    int classes = fc_weights.dim(0);
    int features = fc_weights.dim(1);
    int locations = code.out_h() * code.out_w();
    SPIKESIM_REQUIRE(features == code.channels() * locations,
            "fc features do not match the code size");

    ScoreVector scores;
    scores.num.assign(classes, 0);
    scores.den = scales.den();
    // Slot 0 carries scale 0 and contributes nothing; kept for the one-hot
    // structure but skipped here, as the hardware path does.
    for (int slot = 1; slot < code.slot_count(); ++slot) {
        const SpikeTensor &map = code.slots[slot];
        if (map.total_spikes() == 0) {
            continue;
        }
        for (int c = 0; c < map.channels; ++c) {
            for (int oy = 0; oy < map.height; ++oy) {
                for (int ox = 0; ox < map.width; ++ox) {
                    if (!map.get(c, oy, ox)) {
                        continue;
                    }
                    int feature = c * locations + oy * map.width + ox;
                    for (int j = 0; j < classes; ++j) {
                        scores.num[j] += static_cast<int64_t>(scales.num(slot)) *
                                fc_weights.at2(j, feature);
                    }
                }
            }
        }
    }
    return scores;
}

} // namespace spikesim
