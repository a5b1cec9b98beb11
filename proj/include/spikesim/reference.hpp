#pragma once

#include <optional>
#include <vector>

#include "spikesim/model.hpp"
#include "spikesim/spike_tensor.hpp"
#include "spikesim/ttfs.hpp"
#include "spikesim/value_types.hpp"

namespace spikesim {

// Dense convolution oracle, cross-correlation convention, zero padding,
// exact integer arithmetic in widened registers.
SumTensor dense_conv_ref(const SpikeTensor &input, const FixedTensor &weights, int stride,
        int padding);

// Window sums kept exact as numerator over window^2.
PooledTensor avg_pool_ref(const SpikeTensor &input, int window);

// LIF applied neuron-wise over one timestep (fresh state per neuron).
SpikeTensor lif_over_sums(const SumTensor &sums, const LifParams &params, int64_t *saturations);

// LIF over exact pooled rationals: fires iff count/denom >= threshold, decided
// with cross-multiplied integers so no rounding ever happens.
SpikeTensor lif_over_pooled(const PooledTensor &pooled, const LifParams &params, int one_raw);

// Adds the unit-weight contribution of a spike map into synaptic sums.
void add_residual(SumTensor &sums, const SpikeTensor &spikes, int one_raw);

// Exact classifier scores over spikes (den = 1) or pooled values (den = window^2).
ScoreVector fc_exact_spikes(const SpikeTensor &input, const FixedTensor &weights);
ScoreVector fc_exact_pooled(const PooledTensor &input, const FixedTensor &weights);

// Spike-to-output incidence count of a conv layer: the number of
// (input spike, real output) pairs the dense formula touches, per output
// channel slice. SynOps for the layer is this times out_channels.
int64_t conv_incidence_count(const SpikeTensor &input, int kernel, int stride, int padding);

struct LayerTrace {
    LayerKind kind = LayerKind::Conv;
    std::optional<SpikeTensor> spikes; // spike-valued output, when the layer has one
    int64_t spikes_emitted = 0;        // LIF emissions attributed to this layer
    int64_t synops = 0;                // weight accumulations (one per consumed event)
};

struct ReferenceResult {
    ScoreVector scores;
    std::vector<LayerTrace> trace;
    int64_t lif_saturations = 0;
};

// Golden model: executes the validated graph with dense semantics. Bit-exact
// ground truth for every event-driven path.
ReferenceResult run_reference(const ModelGraph &model, const SpikeTensor &input);

} // namespace spikesim
