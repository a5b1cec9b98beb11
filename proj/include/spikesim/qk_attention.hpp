#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spikesim/fixed_point.hpp"
#include "spikesim/lif.hpp"
#include "spikesim/spike_tensor.hpp"

namespace spikesim {

// Reduction axis for the attention mask. Token mode ORs Q across channels and
// masks K per spatial token; channel mode ORs Q across tokens and masks K per
// channel. Token mode is the default.
enum class MaskAxis { Token, Channel };

// One spiking QK attention block: two 1x1 conv projections with their LIF
// units, an OR-reduced activation mask, and an optional unit-weight shortcut
// from the block input into the K-path membrane sums.
struct QkBlockSpec {
    FixedTensor q_weights; // [c][c][1][1]
    FixedTensor k_weights; // [c][c][1][1]
    LifParams q_lif;
    LifParams k_lif;
    bool residual = false;
    MaskAxis mask_axis = MaskAxis::Token;
};

// Attention activation register: one bit per token (or per channel), each the
// OR of Q spikes over the reduction axis. Also tracks Q-phase completion so a
// K write-back arriving too early is a detectable ordering violation.
class AttenReg {
public:
    AttenReg() = default;
    AttenReg(MaskAxis axis, int channels, int tokens);

    MaskAxis axis() const { return axis_; }

    // Q write-back path: OR the spike into its mask bit.
    void record_q(int channel, int token, bool spike);
    // Marks one token's Q write-backs as complete.
    void close_q_token(int token);
    void close_q_all();

    bool q_closed(int token) const;
    bool mask(int channel, int token) const;

    // K write-back path: applies the mask. Throws OrderingViolation if the
    // token's Q phase has not been closed.
    bool apply_k(int channel, int token, bool spike);

    const std::vector<uint8_t> &bits() const { return bits_; }

private:
    MaskAxis axis_ = MaskAxis::Token;
    int channels_ = 0;
    int tokens_ = 0;
    std::vector<uint8_t> bits_;     // token mode: [tokens]; channel mode: [channels]
    std::vector<uint8_t> q_closed_; // per token
};

struct QkAttentionResult {
    SpikeTensor output;  // masked K
    SpikeTensor q_spikes;
    SpikeTensor k_spikes; // pre-mask
    int64_t synops = 0;   // weight accumulations across both projections
    int64_t lif_saturations = 0;
};

// Functional oracle: Q = LIF(conv1x1_q(x)), K = LIF(conv1x1_k(x) [+ unit*x]),
// mask = OR(Q) over the reduction axis, output = K AND mask.
QkAttentionResult qk_attention_ref(const SpikeTensor &x, const QkBlockSpec &spec);

// One PE write-back as seen by the spiking buffer.
struct Writeback {
    int channel = 0;
    int y = 0;
    int x = 0;
    bool spike = false;
};

struct OnTheFlyResult {
    SpikeTensor output;
    int64_t buffer_writes = 0; // writes into the spiking buffer, masking included
};

// Streams Q write-backs through the attention register, then masks the K
// stream during its own write-back. No pass over the buffer besides the
// write-backs themselves; buffer_writes counts exactly one write per K
// write-back received.
OnTheFlyResult onthefly_writeback(std::span<const Writeback> q_stream,
        std::span<const Writeback> k_stream, AttenReg &reg, int channels, int height, int width);

} // namespace spikesim
