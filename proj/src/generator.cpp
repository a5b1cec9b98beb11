#include "spikesim/generator.hpp"

namespace spikesim {

namespace {

void fill_weights(Rng &rng, FixedTensor &t, int lo, int hi, int snap = 1)
{
    for (auto &v : t.values) {
        int w = rng.uniform(lo, hi);
        if (snap > 1) {
            w = (w / snap) * snap;
        }
        v = static_cast<int8_t>(w);
    }
}

LayerSpec conv_layer(Rng &rng, FixedPointFormat fmt, int ic, int oc, int k, int s, int p)
{
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.in_channels = ic;
    l.out_channels = oc;
    l.kernel = k;
    l.stride = s;
    l.padding = p;
    l.weights = FixedTensor({oc, ic, k, k}, fmt);
    fill_weights(rng, l.weights, -64, 63);
    return l;
}

LayerSpec lif_layer(int32_t threshold_raw)
{
    LayerSpec l;
    l.kind = LayerKind::Lif;
    l.lif = LifParams{1, threshold_raw, ResetMode::HardZero};
    return l;
}

} // namespace

SpikeTensor random_spike_tensor(Rng &rng, int c, int h, int w, double density)
{
    SpikeTensor t(c, h, w);
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (rng.bernoulli(density)) {
                    t.set(ci, y, x, true);
                }
            }
        }
    }
    return t;
}

ModelGraph generate_model(const GenOptions &opt)
{
    Rng rng(opt.seed);
    ModelGraph model;
    model.format.frac_bits = opt.frac_bits;
    FixedPointFormat fmt = model.format;

    if (opt.arch == "fc-min") {
        model.input = {1, 2, 2};
        LayerSpec fc;
        fc.kind = LayerKind::FullyConnected;
        fc.classes = 3;
        fc.features = 4;
        fc.weights = FixedTensor({fc.classes, fc.features}, fmt);
        fill_weights(rng, fc.weights, -96, 95);
        model.layers.push_back(std::move(fc));
    } else if (opt.arch == "conv-tiny") {
        model.input = {2, 8, 8};
        model.layers.push_back(conv_layer(rng, fmt, 2, 4, 3, 1, 1));
        model.layers.push_back(lif_layer(32));
        model.layers.push_back(conv_layer(rng, fmt, 4, 4, 3, 2, 1));
        model.layers.push_back(lif_layer(32));
        LayerSpec pool;
        pool.kind = LayerKind::W2ttfsPool;
        pool.window = 2;
        model.layers.push_back(pool);
        LayerSpec fc;
        fc.kind = LayerKind::FullyConnected;
        fc.classes = 4;
        fc.features = 4 * 2 * 2;
        fc.weights = FixedTensor({fc.classes, fc.features}, fmt);
        fill_weights(rng, fc.weights, -124, 124, pool.window * pool.window);
        model.layers.push_back(std::move(fc));
    } else if (opt.arch == "qk-resnet-toy") {
        // Downsampled residual attention stack with every layer kind present:
        // conv/lif, a residual join, a QK attention block, an average-pool
        // re-binarization stage, and a TTFS-coded classifier head.
        model.input = {2, 8, 8};
        model.layers.push_back(conv_layer(rng, fmt, 2, 4, 3, 1, 1)); // 0
        model.layers.push_back(lif_layer(32));                       // 1
        model.layers.push_back(conv_layer(rng, fmt, 4, 4, 3, 1, 1)); // 2
        LayerSpec res;
        res.kind = LayerKind::ResidualAdd;
        res.residual_from = 1;
        model.layers.push_back(res);       // 3
        model.layers.push_back(lif_layer(32)); // 4
        LayerSpec qk;
        qk.kind = LayerKind::QkformerBlock;
        qk.qk.q_weights = FixedTensor({4, 4, 1, 1}, fmt);
        qk.qk.k_weights = FixedTensor({4, 4, 1, 1}, fmt);
        fill_weights(rng, qk.qk.q_weights, -64, 63);
        fill_weights(rng, qk.qk.k_weights, -64, 63);
        qk.qk.q_lif = LifParams{1, 16, ResetMode::HardZero};
        qk.qk.k_lif = LifParams{1, 16, ResetMode::HardZero};
        qk.qk.residual = true;
        qk.qk.mask_axis = MaskAxis::Token;
        model.layers.push_back(std::move(qk)); // 5
        model.layers.push_back(conv_layer(rng, fmt, 4, 4, 3, 2, 1)); // 6 -> 4x4x4
        model.layers.push_back(lif_layer(32));                       // 7
        LayerSpec ap;
        ap.kind = LayerKind::AvgPool;
        ap.window = 2;
        model.layers.push_back(ap);           // 8 -> pooled 4x2x2 over 4
        model.layers.push_back(lif_layer(8)); // 9: fires at count/4 >= 0.5
        LayerSpec pool;
        pool.kind = LayerKind::W2ttfsPool;
        pool.window = 2;
        model.layers.push_back(pool); // 10 -> code 4x1x1
        LayerSpec fc;
        fc.kind = LayerKind::FullyConnected;
        fc.classes = 5;
        fc.features = 4;
        fc.weights = FixedTensor({fc.classes, fc.features}, fmt);
        fill_weights(rng, fc.weights, -124, 124, pool.window * pool.window);
        model.layers.push_back(std::move(fc)); // 11
    } else {
        throw ConfigError("unknown architecture '" + opt.arch + "'");
    }

    model.validate();
    return model;
}

InputBundle generate_inputs(const ModelGraph &model, const GenOptions &opt)
{
    SPIKESIM_REQUIRE(model.validated, "model must be validated");
    // Offset stream so inputs do not replay the weight stream.
    Rng rng(opt.seed * 0x9e3779b97f4a7c15ull + 1);
    InputBundle bundle;
    bundle.shape = model.input;
    int classes = model.layers.back().classes;
    for (int i = 0; i < opt.images; ++i) {
        bundle.images.push_back(random_spike_tensor(rng, model.input.c, model.input.h,
                model.input.w, opt.density));
        if (opt.with_labels) {
            bundle.labels.push_back(rng.uniform(0, classes - 1));
        }
    }
    return bundle;
}

} // namespace spikesim
