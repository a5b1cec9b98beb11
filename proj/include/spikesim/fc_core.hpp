#pragma once

#include <cstdint>
#include <vector>

#include "spikesim/fixed_point.hpp"
#include "spikesim/spike_tensor.hpp"
#include "spikesim/value_types.hpp"

namespace spikesim {

// One pooling window's report from the TTFS filter: which (channel, location)
// and how many valid spikes the window held.
struct TtfsTuple {
    int channel = 0;
    int location = 0; // oy * out_w + ox within the channel
    int vld_cnt = 0;

    bool operator==(const TtfsTuple &) const = default;
};

// Counts valid spikes per pooling window, channel-major order.
std::vector<TtfsTuple> ttfs_filter(const SpikeTensor &map, int window);

// Instruction mix of the FC core. The datapath must stay multiplier-free:
// shifts, additions and comparisons only.
struct OpCounters {
    int64_t shifts = 0;
    int64_t adds = 0;
    int64_t compares = 0;
    int64_t multiplies = 0; // nonzero only on the exact-rational fallback path
};

// Classifier accumulators driven by the time-reuse scaling strategy: instead
// of scaling a weight by vld_cnt/window^2, the unit weight
// (weight >> log2(window^2), truncated toward negative infinity) is
// accumulated vld_cnt times. The repeated addition is folded into one integer
// product per class, which is arithmetically identical; cycle accounting
// still charges vld_cnt add-cycles per tuple.
struct FcuState {
    int classes = 0;
    int window_sq = 0;
    int locations = 0;      // pooling windows per channel
    int unit_shift = -1;    // log2(window_sq) when it is a power of two
    bool shift_path = true; // false: exact-rational fallback (hardware-infeasible)
    std::vector<int64_t> acc; // shift path: raw units; fallback: numerators over window_sq
    OpCounters ops;
    int64_t add_cycles = 0; // one per repeated unit accumulation
    int64_t saturations = 0;
    int acc_bits = 32;

    static FcuState make(int classes, int window_sq, int locations, int acc_bits = 32);
};

void fcu_accumulate(FcuState &state, const TtfsTuple &tuple, const FixedTensor &fc_weights);

// Argmax over the accumulators; ties break to the lowest class index.
// Charges the comparison chain to the op counters.
int classify(FcuState &state);

// Accumulators as an exact rational score vector (den = 1 on the shift path).
ScoreVector fcu_scores(const FcuState &state);

// Per-run ceiling on |fcu score - exact score| on the shift path, in raw
// units: the truncated remainder is below one post-shift LSB per repetition.
int64_t fcu_truncation_bound(const std::vector<TtfsTuple> &tuples);

} // namespace spikesim
