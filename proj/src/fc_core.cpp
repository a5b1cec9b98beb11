#include "spikesim/fc_core.hpp"

#include <bit>

#include "spikesim/ttfs.hpp"

namespace spikesim {

std::vector<TtfsTuple> ttfs_filter(const SpikeTensor &map, int window)
{
    SPIKESIM_REQUIRE(window > 0 && map.height % window == 0 && map.width % window == 0,
            "window must divide the map dimensions");
    int out_h = map.height / window;
    int out_w = map.width / window;
    std::vector<TtfsTuple> tuples;
    tuples.reserve(static_cast<size_t>(map.channels) * out_h * out_w);
    for (int c = 0; c < map.channels; ++c) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                int vld = window_spike_count(map, c, oy, ox, window);
                tuples.push_back({c, oy * out_w + ox, vld});
            }
        }
    }
    return tuples;
}

FcuState FcuState::make(int classes, int window_sq, int locations, int acc_bits)
{
    SPIKESIM_REQUIRE(classes > 0 && window_sq > 0 && locations > 0, "bad FCU dimensions");
    SPIKESIM_REQUIRE(acc_bits > 1 && acc_bits <= 62, "bad FCU accumulator width");
    FcuState s;
    s.classes = classes;
    s.window_sq = window_sq;
    s.locations = locations;
    s.acc.assign(classes, 0);
    s.acc_bits = acc_bits;
    if (std::has_single_bit(static_cast<unsigned>(window_sq))) {
        s.unit_shift = std::countr_zero(static_cast<unsigned>(window_sq));
        s.shift_path = true;
    } else {
        // Non-shift-friendly window: keep exact rational accumulation and
        // flag the configuration as hardware-infeasible.
        s.unit_shift = -1;
        s.shift_path = false;
    }
    return s;
}

namespace {

void saturating_add(FcuState &s, int j, int64_t delta)
{
    int64_t hi = (int64_t{1} << (s.acc_bits - 1)) - 1;
    int64_t lo = -(int64_t{1} << (s.acc_bits - 1));
    int64_t v = s.acc[j] + delta;
    if (v > hi) {
        v = hi;
        s.saturations++;
    } else if (v < lo) {
        v = lo;
        s.saturations++;
    }
    s.acc[j] = v;
}

} // namespace

void fcu_accumulate(FcuState &state, const TtfsTuple &tuple, const FixedTensor &fc_weights)
{
    SPIKESIM_REQUIRE(fc_weights.shape.size() == 2 && fc_weights.dim(0) == state.classes,
            "fc weights do not match the FCU");
    SPIKESIM_REQUIRE(tuple.vld_cnt >= 0 && tuple.vld_cnt <= state.window_sq,
            "vld_cnt outside [0, window^2]");
    SPIKESIM_REQUIRE(tuple.location >= 0 && tuple.location < state.locations,
            "tuple location out of range");
    if (tuple.vld_cnt == 0) {
        return; // no valid spikes, no membrane update
    }
    int feature = tuple.channel * state.locations + tuple.location;
    SPIKESIM_REQUIRE(feature >= 0 && feature < fc_weights.dim(1),
            "tuple channel out of range");

    for (int j = 0; j < state.classes; ++j) {
        int64_t w = fc_weights.at2(j, feature);
        if (state.shift_path) {
            // Arithmetic shift truncates toward negative infinity.
            int64_t unit = w >> state.unit_shift;
            state.ops.shifts++;
            state.ops.adds += tuple.vld_cnt;
            saturating_add(state, j, unit * tuple.vld_cnt);
        } else {
            state.ops.multiplies++;
            state.ops.adds++;
            saturating_add(state, j, w * tuple.vld_cnt);
        }
    }
    state.add_cycles += tuple.vld_cnt;
}

int classify(FcuState &state)
{
    SPIKESIM_REQUIRE(!state.acc.empty(), "classify on an empty FCU");
    int best = 0;
    for (int j = 1; j < state.classes; ++j) {
        state.ops.compares++;
        if (state.acc[j] > state.acc[best]) {
            best = j; // ties keep the lowest class index
        }
    }
    return best;
}

ScoreVector fcu_scores(const FcuState &state)
{
    ScoreVector s;
    s.num = state.acc;
    s.den = state.shift_path ? 1 : state.window_sq;
    return s;
}

int64_t fcu_truncation_bound(const std::vector<TtfsTuple> &tuples)
{
    int64_t bound = 0;
    for (const TtfsTuple &t : tuples) {
        bound += t.vld_cnt;
    }
    return bound;
}

} // namespace spikesim
