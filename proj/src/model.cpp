#include "spikesim/model.hpp"

#include <string>

namespace spikesim {

const char *layer_kind_name(LayerKind kind)
{
    switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Lif: return "lif";
    case LayerKind::ResidualAdd: return "residual_add";
    case LayerKind::AvgPool: return "avg_pool";
    case LayerKind::W2ttfsPool: return "w2ttfs_pool";
    case LayerKind::QkformerBlock: return "qkformer";
    case LayerKind::FullyConnected: return "fully_connected";
    }
    return "?";
}

int conv_out_dim(int in, int kernel, int stride, int padding)
{
    return (in + 2 * padding - kernel) / stride + 1;
}

namespace {

[[noreturn]] void fail(int layer, const std::string &what)
{
    throw LoadError("layer " + std::to_string(layer) + ": " + what);
}

void check_weight_shape(int layer, const FixedTensor &w, const std::vector<int> &want,
        const char *what)
{
    if (w.shape != want) {
        fail(layer, std::string(what) + " weight shape mismatch");
    }
    if (static_cast<int64_t>(w.values.size()) != w.element_count()) {
        fail(layer, std::string(what) + " weight element count mismatch");
    }
}

} // namespace

void ModelGraph::validate()
{
    validated = false;
    io.clear();
    io.reserve(layers.size());
    if (input.c <= 0 || input.h <= 0 || input.w <= 0) {
        throw LoadError("model input shape must be positive");
    }
    if (!format.valid()) {
        throw LoadError("invalid quantization format");
    }
    if (layers.empty()) {
        throw LoadError("model has no layers");
    }

    LayerIo cur{ValueKind::Spikes, input, 1};
    for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
        const LayerSpec &l = layers[i];
        switch (l.kind) {
        case LayerKind::Conv: {
            if (cur.kind != ValueKind::Spikes) {
                fail(i, "conv input must be spikes");
            }
            if (l.in_channels != cur.shape.c) {
                fail(i, "conv in_channels does not match input shape");
            }
            if (l.stride != 1 && l.stride != 2) {
                fail(i, "conv stride must be 1 or 2");
            }
            if (l.kernel <= 0 || l.padding < 0 || l.out_channels <= 0) {
                fail(i, "conv kernel/padding/out_channels out of range");
            }
            check_weight_shape(i, l.weights,
                    {l.out_channels, l.in_channels, l.kernel, l.kernel}, "conv");
            int oh = conv_out_dim(cur.shape.h, l.kernel, l.stride, l.padding);
            int ow = conv_out_dim(cur.shape.w, l.kernel, l.stride, l.padding);
            if (oh <= 0 || ow <= 0) {
                fail(i, "conv output shape is empty");
            }
            cur = {ValueKind::Sums, {l.out_channels, oh, ow}, 1};
            break;
        }
        case LayerKind::Lif: {
            if (cur.kind != ValueKind::Sums && cur.kind != ValueKind::Pooled) {
                fail(i, "lif input must be synaptic sums or pooled values");
            }
            if (!l.lif.valid()) {
                fail(i, "invalid lif parameters");
            }
            cur = {ValueKind::Spikes, cur.shape, 1};
            break;
        }
        case LayerKind::ResidualAdd: {
            if (cur.kind != ValueKind::Sums) {
                fail(i, "residual_add joins into synaptic sums");
            }
            if (l.residual_from < -1 || l.residual_from >= i) {
                fail(i, "residual source index out of range");
            }
            Shape3 src_shape = l.residual_from < 0 ? input : io[l.residual_from].shape;
            ValueKind src_kind =
                    l.residual_from < 0 ? ValueKind::Spikes : io[l.residual_from].kind;
            if (src_kind != ValueKind::Spikes) {
                fail(i, "residual source must produce spikes");
            }
            if (!(src_shape == cur.shape)) {
                fail(i, "residual endpoints must have identical shapes");
            }
            cur = {ValueKind::Sums, cur.shape, 1};
            break;
        }
        case LayerKind::AvgPool:
        case LayerKind::W2ttfsPool: {
            if (cur.kind != ValueKind::Spikes) {
                fail(i, "pooling input must be spikes");
            }
            if (l.window <= 0) {
                fail(i, "pool window must be positive");
            }
            // Exact division required; truncated pooling is rejected.
            if (cur.shape.h % l.window != 0 || cur.shape.w % l.window != 0) {
                fail(i, "pool window must divide the input dimensions");
            }
            Shape3 out{cur.shape.c, cur.shape.h / l.window, cur.shape.w / l.window};
            ValueKind k = l.kind == LayerKind::AvgPool ? ValueKind::Pooled : ValueKind::TtfsCode;
            cur = {k, out, l.window * l.window};
            break;
        }
        case LayerKind::QkformerBlock: {
            if (cur.kind != ValueKind::Spikes) {
                fail(i, "qkformer input must be spikes");
            }
            int c = cur.shape.c;
            check_weight_shape(i, l.qk.q_weights, {c, c, 1, 1}, "qkformer q");
            check_weight_shape(i, l.qk.k_weights, {c, c, 1, 1}, "qkformer k");
            if (!l.qk.q_lif.valid() || !l.qk.k_lif.valid()) {
                fail(i, "invalid qkformer lif parameters");
            }
            cur = {ValueKind::Spikes, cur.shape, 1};
            break;
        }
        case LayerKind::FullyConnected: {
            if (cur.kind != ValueKind::Spikes && cur.kind != ValueKind::Pooled &&
                    cur.kind != ValueKind::TtfsCode) {
                fail(i, "fully_connected input must be spikes, pooled values, or a ttfs code");
            }
            int64_t feat = cur.shape.count();
            if (l.features != feat) {
                fail(i, "fully_connected features do not match flattened input size");
            }
            if (l.classes <= 0) {
                fail(i, "fully_connected needs at least one class");
            }
            check_weight_shape(i, l.weights, {l.classes, l.features}, "fc");
            cur = {ValueKind::Scores, {l.classes, 1, 1}, cur.denom};
            break;
        }
        }
        io.push_back(cur);
    }

    if (io.back().kind != ValueKind::Scores) {
        throw LoadError("model must end in a fully_connected classifier");
    }
    validated = true;
}

std::vector<std::pair<int, int>> ModelGraph::residual_edges() const
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
        if (layers[i].kind == LayerKind::ResidualAdd) {
            edges.emplace_back(layers[i].residual_from, i);
        }
    }
    return edges;
}

} // namespace spikesim
