#pragma once

#include <vector>

#include "spikesim/fixed_point.hpp"
#include "spikesim/spike_tensor.hpp"
#include "spikesim/value_types.hpp"

namespace spikesim {

// Time-to-first-spike re-encoding of a pooled spike map. Slot k holds a 1 at
// (channel, location) iff that window contained exactly k spikes, so exactly
// one slot fires per (channel, location) and the slot index doubles as the
// window's spike count. Slots run 0..window^2 inclusive: a full window is
// attainable, so window^2 + 1 slots are required.
struct TtfsCode {
    int window_sq = 0;
    std::vector<SpikeTensor> slots; // slots[k]: [c][out_h][out_w]

    int slot_count() const { return window_sq + 1; }
    int channels() const { return slots.empty() ? 0 : slots[0].channels; }
    int out_h() const { return slots.empty() ? 0 : slots[0].height; }
    int out_w() const { return slots.empty() ? 0 : slots[0].width; }

    bool operator==(const TtfsCode &) const = default;
};

// Slot-indexed weight scale, kept as an exact rational: scale(k) = k / window^2.
struct ScaleTable {
    int window_sq = 0;

    int num(int slot) const { return slot; }
    int den() const { return window_sq; }
};

// Spike count of one pooling window.
int window_spike_count(const SpikeTensor &map, int channel, int oy, int ox, int window);

// Encode every pooling window's spike count as a one-hot slot.
TtfsCode w2ttfs_encode(const SpikeTensor &map, int out_h, int out_w);

// Classifier scores over the code with exact rational scaling:
// scores = sum_slot scale(slot) * (W . flatten(code[slot])).
// Feature order matches flatten([c][oy][ox]) of the pooled map.
ScoreVector ttfs_fc_exact(const TtfsCode &code, const FixedTensor &fc_weights,
        const ScaleTable &scales);

} // namespace spikesim
