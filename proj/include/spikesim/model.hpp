#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spikesim/fixed_point.hpp"
#include "spikesim/lif.hpp"
#include "spikesim/qk_attention.hpp"
#include "spikesim/value_types.hpp"

namespace spikesim {

enum class LayerKind {
    Conv,
    Lif,
    ResidualAdd,
    AvgPool,
    W2ttfsPool,
    QkformerBlock,
    FullyConnected,
};

const char *layer_kind_name(LayerKind kind);

// Kind of value a layer produces.
enum class ValueKind { Spikes, Sums, Pooled, TtfsCode, Scores };

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;

    // Conv
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    FixedTensor weights; // conv [oc][ic][K][K]; fc [classes][features]

    // Lif
    LifParams lif;

    // ResidualAdd: producing layer index, or -1 for the model input.
    int residual_from = -1;

    // AvgPool / W2ttfsPool
    int window = 0;

    // QkformerBlock
    QkBlockSpec qk;

    // FullyConnected
    int classes = 0;
    int features = 0;
};

// Validated per-layer output description.
struct LayerIo {
    ValueKind kind = ValueKind::Spikes;
    Shape3 shape;
    int denom = 1; // pooled / ttfs denominator (window^2)
};

// Ordered layer list plus residual skip edges. Sequential topology only; a
// ResidualAdd layer joins the saved output of an earlier spike-valued layer
// into the synaptic sums at its position.
struct ModelGraph {
    Shape3 input;
    FixedPointFormat format;
    std::vector<LayerSpec> layers;

    // Filled by validate().
    std::vector<LayerIo> io;
    bool validated = false;

    void validate(); // throws LoadError naming the first offending layer

    std::vector<std::pair<int, int>> residual_edges() const;

    const LayerIo &output_of(int layer) const
    {
        SPIKESIM_REQUIRE(validated, "model not validated");
        return io[layer];
    }
};

int conv_out_dim(int in, int kernel, int stride, int padding);

} // namespace spikesim
