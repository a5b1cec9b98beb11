#include "spikesim/qk_attention.hpp"

#include "spikesim/reference.hpp"

namespace spikesim {

AttenReg::AttenReg(MaskAxis axis, int channels, int tokens)
        : axis_(axis)
        , channels_(channels)
        , tokens_(tokens)
{
    SPIKESIM_REQUIRE(channels > 0 && tokens > 0, "attention register needs a nonempty block");
    bits_.assign(axis == MaskAxis::Token ? tokens : channels, 0);
    q_closed_.assign(tokens, 0);
}

void AttenReg::record_q(int channel, int token, bool spike)
{
    SPIKESIM_REQUIRE(channel >= 0 && channel < channels_ && token >= 0 && token < tokens_,
            "attention register index out of range");
    if (!spike) {
        return;
    }
    if (axis_ == MaskAxis::Token) {
        bits_[token] = 1;
    } else {
        bits_[channel] = 1;
    }
}

void AttenReg::close_q_token(int token)
{
    SPIKESIM_REQUIRE(token >= 0 && token < tokens_, "token out of range");
    q_closed_[token] = 1;
}

void AttenReg::close_q_all()
{
    q_closed_.assign(q_closed_.size(), 1);
}

bool AttenReg::q_closed(int token) const
{
    SPIKESIM_REQUIRE(token >= 0 && token < tokens_, "token out of range");
    return q_closed_[token] != 0;
}

bool AttenReg::mask(int channel, int token) const
{
    SPIKESIM_REQUIRE(channel >= 0 && channel < channels_ && token >= 0 && token < tokens_,
            "attention register index out of range");
    return axis_ == MaskAxis::Token ? bits_[token] != 0 : bits_[channel] != 0;
}

bool AttenReg::apply_k(int channel, int token, bool spike)
{
    if (!q_closed(token)) {
        throw OrderingViolation("K write-back before Q completion for token " +
                std::to_string(token));
    }
    return spike && mask(channel, token);
}

QkAttentionResult qk_attention_ref(const SpikeTensor &x, const QkBlockSpec &spec)
{
    QkAttentionResult r;
    int one_raw = spec.q_weights.format.one_raw();

    SumTensor q_sums = dense_conv_ref(x, spec.q_weights, 1, 0);
    r.synops += conv_incidence_count(x, 1, 1, 0) * spec.q_weights.dim(0);
    r.q_spikes = lif_over_sums(q_sums, spec.q_lif, &r.lif_saturations);

    SumTensor k_sums = dense_conv_ref(x, spec.k_weights, 1, 0);
    r.synops += conv_incidence_count(x, 1, 1, 0) * spec.k_weights.dim(0);
    if (spec.residual) {
        add_residual(k_sums, x, one_raw);
        r.synops += x.total_spikes();
    }
    r.k_spikes = lif_over_sums(k_sums, spec.k_lif, &r.lif_saturations);

    // Token mask: OR of Q over the reduction axis, ANDed into K.
    r.output = SpikeTensor(x.channels, x.height, x.width);
    for (int c = 0; c < x.channels; ++c) {
        for (int y = 0; y < x.height; ++y) {
            for (int xx = 0; xx < x.width; ++xx) {
                bool bit;
                if (spec.mask_axis == MaskAxis::Token) {
                    bit = false;
                    for (int qc = 0; qc < x.channels && !bit; ++qc) {
                        bit = r.q_spikes.get(qc, y, xx);
                    }
                } else {
                    bit = false;
                    for (int qy = 0; qy < x.height && !bit; ++qy) {
                        for (int qx = 0; qx < x.width && !bit; ++qx) {
                            bit = r.q_spikes.get(c, qy, qx);
                        }
                    }
                }
                r.output.set(c, y, xx, r.k_spikes.get(c, y, xx) && bit);
            }
        }
    }
    return r;
}

OnTheFlyResult onthefly_writeback(std::span<const Writeback> q_stream,
        std::span<const Writeback> k_stream, AttenReg &reg, int channels, int height, int width)
{
    OnTheFlyResult r;
    r.output = SpikeTensor(channels, height, width);
    for (const Writeback &wb : q_stream) {
        reg.record_q(wb.channel, wb.y * width + wb.x, wb.spike);
    }
    reg.close_q_all();
    for (const Writeback &wb : k_stream) {
        bool bit = reg.apply_k(wb.channel, wb.y * width + wb.x, wb.spike);
        r.output.set(wb.channel, wb.y, wb.x, bit);
        r.buffer_writes++;
    }
    return r;
}

} // namespace spikesim
