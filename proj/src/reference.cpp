#include "spikesim/reference.hpp"

#include <variant>

#include "spikesim/qk_attention.hpp"

namespace spikesim {

SumTensor dense_conv_ref(const SpikeTensor &input, const FixedTensor &weights, int stride,
        int padding)
{
    SPIKESIM_REQUIRE(weights.shape.size() == 4, "conv weights must be 4-d");
    int oc = weights.dim(0);
    int ic = weights.dim(1);
    int k = weights.dim(2);
    SPIKESIM_REQUIRE(weights.dim(3) == k, "conv kernel must be square");
    SPIKESIM_REQUIRE(ic == input.channels, "conv input channels mismatch");
    SPIKESIM_REQUIRE(stride >= 1 && padding >= 0, "bad conv stride/padding");

    int oh = conv_out_dim(input.height, k, stride, padding);
    int ow = conv_out_dim(input.width, k, stride, padding);
    SPIKESIM_REQUIRE(oh > 0 && ow > 0, "conv output is empty");

    SumTensor out({oc, oh, ow});
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                int64_t acc = 0;
                for (int i = 0; i < ic; ++i) {
                    for (int ki = 0; ki < k; ++ki) {
                        int y = oy * stride + ki - padding;
                        if (y < 0 || y >= input.height) {
                            continue;
                        }
                        for (int kj = 0; kj < k; ++kj) {
                            int x = ox * stride + kj - padding;
                            if (x < 0 || x >= input.width) {
                                continue;
                            }
                            if (input.get(i, y, x)) {
                                acc += weights.at4(o, i, ki, kj);
                            }
                        }
                    }
                }
                out.at(o, oy, ox) = acc;
            }
        }
    }
    return out;
}

PooledTensor avg_pool_ref(const SpikeTensor &input, int window)
{
    SPIKESIM_REQUIRE(window > 0 && input.height % window == 0 && input.width % window == 0,
            "pool window must divide the input dimensions");
    PooledTensor out({input.channels, input.height / window, input.width / window},
            window * window);
    for (int c = 0; c < input.channels; ++c) {
        for (int oy = 0; oy < out.shape.h; ++oy) {
            for (int ox = 0; ox < out.shape.w; ++ox) {
                int sum = 0;
                for (int dy = 0; dy < window; ++dy) {
                    for (int dx = 0; dx < window; ++dx) {
                        sum += input.get(c, oy * window + dy, ox * window + dx);
                    }
                }
                out.at(c, oy, ox) = sum;
            }
        }
    }
    return out;
}

SpikeTensor lif_over_sums(const SumTensor &sums, const LifParams &params, int64_t *saturations)
{
    SpikeTensor out(sums.shape.c, sums.shape.h, sums.shape.w);
    for (int c = 0; c < sums.shape.c; ++c) {
        for (int y = 0; y < sums.shape.h; ++y) {
            for (int x = 0; x < sums.shape.w; ++x) {
                LifState state;
                LifStepResult r = lif_step(state, params, sums.at(c, y, x));
                if (saturations != nullptr) {
                    *saturations += state.saturations;
                }
                out.set(c, y, x, r.spike);
            }
        }
    }
    return out;
}

SpikeTensor lif_over_pooled(const PooledTensor &pooled, const LifParams &params, int one_raw)
{
    SPIKESIM_REQUIRE(params.valid(), "invalid LIF parameters");
    SpikeTensor out(pooled.shape.c, pooled.shape.h, pooled.shape.w);
    for (int c = 0; c < pooled.shape.c; ++c) {
        for (int y = 0; y < pooled.shape.h; ++y) {
            for (int x = 0; x < pooled.shape.w; ++x) {
                // count/denom * 1.0 >= threshold  <=>  count*one_raw >= threshold*denom
                int64_t lhs = static_cast<int64_t>(pooled.at(c, y, x)) * one_raw;
                int64_t rhs = static_cast<int64_t>(params.threshold_raw) * pooled.denom;
                out.set(c, y, x, lhs >= rhs);
            }
        }
    }
    return out;
}

void add_residual(SumTensor &sums, const SpikeTensor &spikes, int one_raw)
{
    SPIKESIM_REQUIRE(sums.shape.c == spikes.channels && sums.shape.h == spikes.height &&
                    sums.shape.w == spikes.width,
            "residual endpoints must have identical shapes");
    for (int c = 0; c < spikes.channels; ++c) {
        for (int y = 0; y < spikes.height; ++y) {
            for (int x = 0; x < spikes.width; ++x) {
                if (spikes.get(c, y, x)) {
                    sums.at(c, y, x) += one_raw;
                }
            }
        }
    }
}

ScoreVector fc_exact_spikes(const SpikeTensor &input, const FixedTensor &weights)
{
    int classes = weights.dim(0);
    int features = weights.dim(1);
    SPIKESIM_REQUIRE(features == input.size(), "fc features mismatch");
    ScoreVector scores;
    scores.num.assign(classes, 0);
    scores.den = 1;
    int f = 0;
    for (int c = 0; c < input.channels; ++c) {
        for (int y = 0; y < input.height; ++y) {
            for (int x = 0; x < input.width; ++x, ++f) {
                if (!input.get(c, y, x)) {
                    continue;
                }
                for (int j = 0; j < classes; ++j) {
                    scores.num[j] += weights.at2(j, f);
                }
            }
        }
    }
    return scores;
}

ScoreVector fc_exact_pooled(const PooledTensor &input, const FixedTensor &weights)
{
    int classes = weights.dim(0);
    int features = weights.dim(1);
    SPIKESIM_REQUIRE(features == input.shape.count(), "fc features mismatch");
    ScoreVector scores;
    scores.num.assign(classes, 0);
    scores.den = input.denom;
    for (int f = 0; f < features; ++f) {
        int32_t count = input.counts[f];
        if (count == 0) {
            continue;
        }
        for (int j = 0; j < classes; ++j) {
            scores.num[j] += static_cast<int64_t>(count) * weights.at2(j, f);
        }
    }
    return scores;
}

int64_t conv_incidence_count(const SpikeTensor &input, int kernel, int stride, int padding)
{
    int oh = conv_out_dim(input.height, kernel, stride, padding);
    int ow = conv_out_dim(input.width, kernel, stride, padding);
    auto clip_count = [](int lo, int hi, int n) {
        lo = lo < 0 ? 0 : lo;
        hi = hi >= n ? n - 1 : hi;
        return hi < lo ? 0 : hi - lo + 1;
    };
    auto floor_div = [](int a, int b) {
        int q = a / b;
        return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
    };
    int64_t count = 0;
    for (int c = 0; c < input.channels; ++c) {
        for (int y = 0; y < input.height; ++y) {
            for (int x = 0; x < input.width; ++x) {
                if (!input.get(c, y, x)) {
                    continue;
                }
                int oy_lo = -floor_div(-(y + padding - kernel + 1), stride);
                int oy_hi = floor_div(y + padding, stride);
                int ox_lo = -floor_div(-(x + padding - kernel + 1), stride);
                int ox_hi = floor_div(x + padding, stride);
                count += static_cast<int64_t>(clip_count(oy_lo, oy_hi, oh)) *
                        clip_count(ox_lo, ox_hi, ow);
            }
        }
    }
    return count;
}

namespace {

using LayerValue = std::variant<SpikeTensor, SumTensor, PooledTensor, TtfsCode, ScoreVector>;

// SynOps of a classifier pass over a ttfs code: every window with vld_cnt
// spikes triggers vld_cnt unit accumulations per class.
int64_t code_fc_synops(const TtfsCode &code, int classes)
{
    int64_t tuples_weighted = 0;
    for (int slot = 1; slot < code.slot_count(); ++slot) {
        tuples_weighted += static_cast<int64_t>(slot) * code.slots[slot].total_spikes();
    }
    return tuples_weighted * classes;
}

int64_t pooled_nonzero(const PooledTensor &p)
{
    int64_t n = 0;
    for (int32_t c : p.counts) {
        n += c != 0;
    }
    return n;
}

} // namespace

ReferenceResult run_reference(const ModelGraph &model, const SpikeTensor &input)
{
    SPIKESIM_REQUIRE(model.validated, "model must be validated before execution");
    SPIKESIM_REQUIRE(input.channels == model.input.c && input.height == model.input.h &&
                    input.width == model.input.w,
            "input shape does not match the model");

    int one_raw = model.format.one_raw();
    ReferenceResult result;
    result.trace.reserve(model.layers.size());

    // Spike-valued outputs kept for residual sources.
    std::vector<std::optional<SpikeTensor>> spike_outputs(model.layers.size());

    LayerValue value = input;
    for (int i = 0; i < static_cast<int>(model.layers.size()); ++i) {
        const LayerSpec &l = model.layers[i];
        LayerTrace t;
        t.kind = l.kind;
        switch (l.kind) {
        case LayerKind::Conv: {
            const SpikeTensor &x = std::get<SpikeTensor>(value);
            t.synops = conv_incidence_count(x, l.kernel, l.stride, l.padding) * l.out_channels;
            value = dense_conv_ref(x, l.weights, l.stride, l.padding);
            break;
        }
        case LayerKind::Lif: {
            if (std::holds_alternative<SumTensor>(value)) {
                value = lif_over_sums(std::get<SumTensor>(value), l.lif,
                        &result.lif_saturations);
            } else {
                value = lif_over_pooled(std::get<PooledTensor>(value), l.lif, one_raw);
            }
            const SpikeTensor &out = std::get<SpikeTensor>(value);
            t.spikes = out;
            t.spikes_emitted = out.total_spikes();
            break;
        }
        case LayerKind::ResidualAdd: {
            const SpikeTensor &src = l.residual_from < 0
                    ? input
                    : *spike_outputs[l.residual_from];
            SumTensor &sums = std::get<SumTensor>(value);
            add_residual(sums, src, one_raw);
            t.synops = src.total_spikes();
            break;
        }
        case LayerKind::AvgPool: {
            const SpikeTensor &x = std::get<SpikeTensor>(value);
            t.synops = x.total_spikes(); // one window accumulation per spike
            value = avg_pool_ref(x, l.window);
            break;
        }
        case LayerKind::W2ttfsPool: {
            const SpikeTensor &x = std::get<SpikeTensor>(value);
            t.synops = x.total_spikes(); // TTFS filter counts each spike once
            const LayerIo &io = model.output_of(i);
            value = w2ttfs_encode(x, io.shape.h, io.shape.w);
            break;
        }
        case LayerKind::QkformerBlock: {
            const SpikeTensor &x = std::get<SpikeTensor>(value);
            QkAttentionResult qk = qk_attention_ref(x, l.qk);
            t.synops = qk.synops;
            t.spikes_emitted = qk.q_spikes.total_spikes() + qk.k_spikes.total_spikes();
            t.spikes = qk.output;
            result.lif_saturations += qk.lif_saturations;
            value = qk.output;
            break;
        }
        case LayerKind::FullyConnected: {
            if (std::holds_alternative<SpikeTensor>(value)) {
                const SpikeTensor &x = std::get<SpikeTensor>(value);
                t.synops = x.total_spikes() * l.classes;
                value = fc_exact_spikes(x, l.weights);
            } else if (std::holds_alternative<PooledTensor>(value)) {
                const PooledTensor &x = std::get<PooledTensor>(value);
                t.synops = pooled_nonzero(x) * l.classes;
                value = fc_exact_pooled(x, l.weights);
            } else {
                const TtfsCode &code = std::get<TtfsCode>(value);
                t.synops = code_fc_synops(code, l.classes);
                value = ttfs_fc_exact(code, l.weights, ScaleTable{code.window_sq});
            }
            break;
        }
        }
        if (std::holds_alternative<SpikeTensor>(value)) {
            spike_outputs[i] = std::get<SpikeTensor>(value);
            if (!t.spikes.has_value()) {
                t.spikes = std::get<SpikeTensor>(value);
            }
        }
        result.trace.push_back(std::move(t));
    }

    result.scores = std::get<ScoreVector>(value);
    return result;
}

} // namespace spikesim
