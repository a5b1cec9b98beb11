#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/model.hpp"
#include "test_util.hpp"

using namespace spikesim;
using spikesim::testing::random_fixed_tensor;

namespace {

LayerSpec make_conv(Rng &rng, int ic, int oc, int k, int s, int p)
{
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.in_channels = ic;
    l.out_channels = oc;
    l.kernel = k;
    l.stride = s;
    l.padding = p;
    l.weights = random_fixed_tensor(rng, {oc, ic, k, k});
    return l;
}

LayerSpec make_lif(int32_t threshold)
{
    LayerSpec l;
    l.kind = LayerKind::Lif;
    l.lif = LifParams{1, threshold, ResetMode::HardZero};
    return l;
}

LayerSpec make_fc(Rng &rng, int classes, int features)
{
    LayerSpec l;
    l.kind = LayerKind::FullyConnected;
    l.classes = classes;
    l.features = features;
    l.weights = random_fixed_tensor(rng, {classes, features});
    return l;
}

} // namespace

TEST_CASE("conv shape chaining follows the output formula")
{
    Rng rng(1);
    ModelGraph m;
    m.input = {2, 9, 9};
    m.layers.push_back(make_conv(rng, 2, 4, 3, 2, 1));
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_fc(rng, 3, 4 * 5 * 5));
    m.validate();
    CHECK(m.output_of(0).shape == Shape3{4, 5, 5}); // (9 + 2 - 3)/2 + 1
    CHECK(m.output_of(0).kind == ValueKind::Sums);
    CHECK(m.output_of(1).kind == ValueKind::Spikes);
    CHECK(m.output_of(2).kind == ValueKind::Scores);
}

TEST_CASE("validation rejects mismatched conv channels with the layer index")
{
    Rng rng(2);
    ModelGraph m;
    m.input = {2, 8, 8};
    m.layers.push_back(make_conv(rng, 3, 4, 3, 1, 1)); // wrong in_channels
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_fc(rng, 3, 4 * 8 * 8));
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("layer 0"), LoadError);
}

TEST_CASE("validation rejects non-divisible pooling")
{
    Rng rng(3);
    ModelGraph m;
    m.input = {1, 6, 6};
    LayerSpec pool;
    pool.kind = LayerKind::AvgPool;
    pool.window = 4; // 6 % 4 != 0
    m.layers.push_back(pool);
    m.layers.push_back(make_fc(rng, 2, 1));
    CHECK_THROWS_AS(m.validate(), LoadError);
}

TEST_CASE("residual endpoints must have identical shapes")
{
    Rng rng(4);
    ModelGraph m;
    m.input = {2, 8, 8};
    m.layers.push_back(make_conv(rng, 2, 4, 3, 1, 1));
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_conv(rng, 4, 4, 3, 2, 1)); // 4x4x4, source is 4x8x8
    LayerSpec res;
    res.kind = LayerKind::ResidualAdd;
    res.residual_from = 1;
    m.layers.push_back(res);
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_fc(rng, 3, 4 * 4 * 4));
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("identical shapes"), LoadError);
}

TEST_CASE("residual edges are derived from residual layers")
{
    Rng rng(5);
    ModelGraph m;
    m.input = {2, 8, 8};
    m.layers.push_back(make_conv(rng, 2, 2, 3, 1, 1));
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_conv(rng, 2, 2, 3, 1, 1));
    LayerSpec res;
    res.kind = LayerKind::ResidualAdd;
    res.residual_from = 1;
    m.layers.push_back(res);
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_fc(rng, 3, 2 * 8 * 8));
    m.validate();
    auto edges = m.residual_edges();
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == std::pair<int, int>{1, 3});
}

TEST_CASE("a model must end in a classifier")
{
    Rng rng(6);
    ModelGraph m;
    m.input = {1, 4, 4};
    m.layers.push_back(make_conv(rng, 1, 2, 3, 1, 1));
    m.layers.push_back(make_lif(16));
    CHECK_THROWS_AS(m.validate(), LoadError);
}

TEST_CASE("lif cannot consume spikes directly")
{
    Rng rng(7);
    ModelGraph m;
    m.input = {1, 4, 4};
    m.layers.push_back(make_lif(16));
    m.layers.push_back(make_fc(rng, 2, 16));
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("layer 0"), LoadError);
}

TEST_CASE("generated architectures validate")
{
    for (const char *arch : {"fc-min", "conv-tiny", "qk-resnet-toy"}) {
        GenOptions opt;
        opt.arch = arch;
        opt.seed = 9;
        ModelGraph m = generate_model(opt);
        CHECK(m.validated);
    }
    // The toy residual-attention stack carries every layer kind.
    ModelGraph m = generate_model(GenOptions{});
    bool has[7] = {};
    for (const LayerSpec &l : m.layers) {
        has[static_cast<int>(l.kind)] = true;
    }
    for (bool h : has) {
        CHECK(h);
    }
}
